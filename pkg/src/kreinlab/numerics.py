"""Dense complex matrix kernel.

Thin contracts over LAPACK (through numpy/scipy): every routine validates its
input, applies the global singularity rule and raises a library exception
instead of returning garbage.  Matrices are plain ``numpy.ndarray`` objects of
dtype ``complex128``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg

from .errors import NoConvergence, NonFiniteEntry, NotHermitian, ShapeMismatch, Singular

RCOND = 1e-12
SOLVE_TOL = 1e-10


def as_matrix(a: Any, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array (copy-free when possible)."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeMismatch(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} has non-finite entries")
    return arr


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {a.shape}")


def fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values in descending order."""
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def spectral_norm(a: np.ndarray) -> float:
    s = singular_values(np.asarray(a, dtype=complex))
    return float(s[0]) if s.size else 0.0


def smallest_singular_value(a: np.ndarray) -> float:
    s = singular_values(np.asarray(a, dtype=complex))
    return float(s[-1]) if s.size else 0.0


def is_singular(a: np.ndarray, rcond: float = RCOND) -> bool:
    s = singular_values(a)
    return bool(s[-1] <= rcond * s[0]) if s.size else True


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return fro(a - a.conj().T) <= tol * fro(a)


def solve(a: np.ndarray, b: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    """Solve ``a @ x = b``.

    Raises :class:`Singular` when the smallest singular value of ``a`` is at
    most ``rcond`` times the largest.  ``b`` may be a vector or a matrix; the
    result has the same dimensionality.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _require_square(a, "A")
    if b.shape[0] != a.shape[0]:
        raise ShapeMismatch(f"A is {a.shape} but B has {b.shape[0]} rows")
    if is_singular(a, rcond):
        raise Singular(f"matrix is singular to rcond {rcond:g}")
    return np.linalg.solve(a, b)


def inv(a: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    _require_square(a)
    return solve(a, np.eye(a.shape[0], dtype=complex), rcond)


@dataclass(frozen=True)
class LogDet:
    """Determinant carried as ``phase * exp(log_modulus)``."""

    log_modulus: float
    phase: complex

    @property
    def value(self) -> complex:
        if self.log_modulus == -math.inf:
            return 0j
        return self.phase * math.exp(self.log_modulus)

    @property
    def is_zero(self) -> bool:
        return self.log_modulus == -math.inf

    def real_proxy(self, clamp: float = 700.0) -> float:
        """Signed real stand-in for a determinant that is real up to rounding.

        The sign comes from the real part of the phase, the magnitude is
        ``exp(log_modulus)`` with the exponent clamped so it never overflows.
        """
        if self.is_zero:
            return 0.0
        sign = 1.0 if self.phase.real >= 0 else -1.0
        return sign * math.exp(min(max(self.log_modulus, -clamp), clamp))

    def to_json(self) -> dict:
        return {
            "log_modulus": None if self.is_zero else self.log_modulus,
            "phase": [self.phase.real, self.phase.imag],
        }


def log_det(a: np.ndarray) -> LogDet:
    """Log-determinant from the pivots of a partially pivoted LU factorization."""
    a = np.asarray(a, dtype=complex)
    _require_square(a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0):
        return LogDet(-math.inf, 1 + 0j)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    log_mod = float(np.sum(np.log(np.abs(diag))))
    # accumulate the phase as a sum of angles to avoid drifting off |phase| = 1
    angle = float(np.sum(np.angle(diag))) + math.pi * (swaps % 2)
    return LogDet(log_mod, complex(math.cos(angle), math.sin(angle)))


def eig_hermitian(a: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and a unitary eigenvector matrix of a Hermitian matrix."""
    a = np.asarray(a, dtype=complex)
    _require_square(a)
    if not is_hermitian(a, tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w, v


def eig_general(a: np.ndarray) -> np.ndarray:
    """Eigenvalue multiset of a general square matrix (sorted by real, then imaginary part)."""
    a = np.asarray(a, dtype=complex)
    _require_square(a)
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # QR iteration failed
        raise NoConvergence(str(exc)) from exc
    return w[np.lexsort((w.imag, w.real))]


def nullspace(a: np.ndarray, rel_tol: float, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical kernel: right singular vectors with
    ``sigma <= rel_tol * scale`` (``scale`` defaults to ``sigma_max``).

    Pass an external ``scale`` when ``a`` is a sum of terms that may cancel
    completely, otherwise a matrix that vanishes to rounding has no kernel.
    """
    a = np.asarray(a, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if ref == 0:
        return np.eye(a.shape[1], dtype=complex)
    full = np.zeros(a.shape[1])
    full[: s.size] = s
    mask = full <= rel_tol * ref
    return vh.conj().T[:, mask]


# -- JSON interchange: nested row-major lists of [re, im] pairs -------------

def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_json(obj: Any, name: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ShapeMismatch(f"{name}: expected a nonempty list of rows")
    ncols = len(obj[0])
    rows = []
    for row in obj:
        if len(row) != ncols:
            raise ShapeMismatch(f"{name}: ragged rows")
        vals = []
        for entry in row:
            if isinstance(entry, (int, float)) and not isinstance(entry, bool):
                vals.append(complex(entry))
            elif (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in entry)
            ):
                vals.append(complex(entry[0], entry[1]))
            else:
                raise ShapeMismatch(f"{name}: entries must be [re, im] pairs")
        rows.append(vals)
    return as_matrix(np.array(rows, dtype=complex), name)
