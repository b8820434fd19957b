"""Point interactions in R^3.

The unperturbed operator is ``A0 = I - Laplacian``; ``n`` centers ``x_j`` carry
the boundary condition ``(beta0 Gamma0 + beta1 Gamma1) u = 0``.  All quantities
are closed-form in the free Green function

    G_z(r) = exp(i kappa r) / (4 pi r),   kappa = sqrt(z - 1),  Im kappa >= 0,

so the M-matrix has ``i kappa / (4 pi)`` on the diagonal and ``G_z(|x_j - x_s|)``
off it.  Energies are reported in both conventions: ``z`` (spectral parameter
of ``I - Laplacian``) and ``E = z - 1`` (spectrum of ``-Laplacian``).  With this
normalization ``beta0 = alpha I, beta1 = I`` binds for ``alpha > 0``.
"""

from __future__ import annotations

import cmath
import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import numerics as nx
from . import rootfind
from .errors import (
    CoincidentPoints,
    InputError,
    NonpositiveRadius,
    NonRealCoupling,
    NotARoot,
    OnBranchCut,
    ShapeMismatch,
    Singular,
    SingularBoundaryOperator,
)

CUT_TOL = 1e-12
COINCIDENCE_TOL = 1e-12
KERNEL_REL_TOL = 1e-8
Z_MAX_MARGIN = 1e-9
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True, eq=False)
class PointModel:
    centers: np.ndarray  # (n, 3)
    beta0: np.ndarray
    beta1: np.ndarray

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def distances(self) -> np.ndarray:
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))


def point_model(centers, beta0=None, beta1=None, alpha=None) -> PointModel:
    """Build a validated model; ``alpha`` is shorthand for ``beta0 = diag(alpha), beta1 = I``."""
    c = np.asarray(centers, dtype=float)
    if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 1:
        raise ShapeMismatch(f"centers must be an (n, 3) array, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InputError("centers must be finite")
    n = c.shape[0]
    if alpha is not None:
        if beta0 is not None or beta1 is not None:
            raise InputError("give either alpha or beta0/beta1, not both")
        a = np.asarray(alpha, dtype=float).reshape(-1)
        if a.shape != (n,):
            raise ShapeMismatch(f"alpha must have {n} entries")
        b0, b1 = np.diag(a).astype(complex), np.eye(n, dtype=complex)
    else:
        if beta0 is None or beta1 is None:
            raise InputError("beta0 and beta1 are both required")
        b0, b1 = nx.as_matrix(beta0, "beta0"), nx.as_matrix(beta1, "beta1")
        if b0.shape != (n, n) or b1.shape != (n, n):
            raise ShapeMismatch(f"beta0, beta1 must be {n}x{n}")
    model = PointModel(c, b0, b1)
    if n > 1:
        d = model.distances()
        np.fill_diagonal(d, math.inf)
        if d.min() <= COINCIDENCE_TOL:
            raise CoincidentPoints("centers must be pairwise distinct")
    return model


def model_from_json(obj: dict) -> PointModel:
    if not isinstance(obj, dict) or "centers" not in obj:
        raise InputError("model file needs a 'centers' entry")
    if "alpha" in obj:
        return point_model(obj["centers"], alpha=obj["alpha"])
    try:
        b0 = nx.matrix_from_json(obj["beta0"], "beta0")
        b1 = nx.matrix_from_json(obj["beta1"], "beta1")
    except KeyError as exc:
        raise InputError("model file needs 'alpha' or both 'beta0' and 'beta1'") from exc
    return point_model(obj["centers"], b0, b1)


def kappa(z: complex) -> complex:
    """``sqrt(z - 1)`` on the decaying branch ``Im kappa >= 0``."""
    z = complex(z)
    w = z - 1.0
    cut_distance = abs(w.imag) if w.real >= 0 else abs(w)
    if cut_distance <= CUT_TOL:
        raise OnBranchCut(f"z = {z} lies on the cut [1, inf)")
    if w.imag == 0:
        return 1j * math.sqrt(-w.real)
    k = cmath.sqrt(w)
    return -k if k.imag < 0 else k


def green_value(z: complex, r: float) -> complex:
    """Free Green function ``exp(i kappa r) / (4 pi r)``."""
    if not r > 0:
        raise NonpositiveRadius(f"radius must be positive, got {r}")
    k = kappa(z)
    return cmath.exp(1j * k * r) / (FOUR_PI * r)


def _green_array(k: complex, r: np.ndarray) -> np.ndarray:
    return np.exp(1j * k * r) / (FOUR_PI * r)


def m_matrix(model: PointModel, z: complex) -> np.ndarray:
    """M-matrix: ``i kappa / 4 pi`` on the diagonal, ``G_z(|x_j - x_s|)`` off it."""
    k = kappa(z)
    n = model.n
    M = np.empty((n, n), dtype=complex)
    D = model.distances()
    iu = np.triu_indices(n, 1)
    vals = _green_array(k, D[iu])
    M[iu] = vals
    M[iu[1], iu[0]] = vals
    M[np.diag_indices(n)] = 1j * k / FOUR_PI
    return M


def boundary_matrix(model: PointModel, z: complex) -> np.ndarray:
    return model.beta0 + model.beta1 @ m_matrix(model, z)


def _kernel(model: PointModel, z: complex) -> np.ndarray:
    M = m_matrix(model, z)
    scale = nx.spectral_norm(model.beta0) + nx.spectral_norm(model.beta1) * nx.spectral_norm(M)
    return nx.nullspace(model.beta0 + model.beta1 @ M, KERNEL_REL_TOL, scale)


def secular_pt(model: PointModel, z: complex) -> nx.LogDet:
    """``log det(beta0 + beta1 M(z))``."""
    return nx.log_det(boundary_matrix(model, z))


@dataclass(frozen=True)
class BoundState:
    z: float
    multiplicity: int

    @property
    def energy(self) -> float:
        return self.z - 1.0

    def to_json(self) -> dict:
        return {"z": self.z, "energy": self.energy, "multiplicity": self.multiplicity}


def _is_real_symmetric(a: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(nx.fro(a), 1.0)
    return nx.fro(a.imag) <= tol * scale and nx.fro(a - a.T) <= tol * scale


def bound_states(model: PointModel, z_min: float, z_max: float, n_samples: int = 400) -> list[BoundState]:
    """Real zeros of the secular determinant on ``[z_min, z_max]`` (``z_max < 1``).

    ``beta0`` and ``beta1`` must be real symmetric, which makes the determinant
    real below the cut.  When ``beta1`` is invertible with ``beta1^{-1} beta0``
    symmetric the matrix ``beta1^{-1} beta0 + M(z)`` increases with ``z`` and the
    search also counts zeros per cell, so close or repeated roots are resolved;
    otherwise it is a plain sign-change scan.
    """
    if not (_is_real_symmetric(model.beta0) and _is_real_symmetric(model.beta1)):
        raise NonRealCoupling("bound-state search needs real symmetric beta0, beta1; use winding_number")
    if z_max > 1.0 - Z_MAX_MARGIN:
        raise InputError(f"z_max must be at most 1 - {Z_MAX_MARGIN:g}")
    if not z_min < z_max:
        raise InputError("need z_min < z_max")
    H = None
    if not nx.is_singular(model.beta1):
        H = np.linalg.solve(model.beta1, model.beta0).real
        if nx.fro(H - H.T) > 1e-10 * max(nx.fro(H), 1.0):
            H = None
    found: list[tuple[float, int]] = []
    if H is not None:
        Hs = 0.5 * (H + H.T)

        def K(x: float) -> np.ndarray:
            return Hs + m_matrix(model, x).real

        found = rootfind.increasing_hermitian_zeros(K, z_min, z_max, n_samples)
    else:
        def proxy(x: float) -> float:
            return secular_pt(model, x).real_proxy()

        for br in rootfind.bracket_scan(proxy, z_min, z_max, n_samples):
            found.append((rootfind.bisect(proxy, br), 1))
    out = []
    for z0, _ in found:
        mult = _kernel(model, z0).shape[1]
        out.append(BoundState(float(z0), max(mult, 1)))
    return out


def eigenfunction_coefficients(model: PointModel, z0: complex) -> np.ndarray:
    """Orthonormal basis (n x k) of the kernel of ``beta0 + beta1 M(z0)``.

    Each column ``a`` gives the eigenfunction ``sum_j a_j G_{z0}(|x - x_j|)``.  Columns
    are phase-normalized so their largest entry is real and positive.
    """
    V = _kernel(model, z0)
    if V.shape[1] == 0:
        raise NotARoot(f"z = {z0} is not a zero of the secular determinant")
    for j in range(V.shape[1]):
        col = V[:, j]
        p = col[np.argmax(np.abs(col))]
        V[:, j] = col * (abs(p) / p)
    return V


def eigenfunction(model: PointModel, z0: complex, coeffs: np.ndarray, x) -> complex:
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum((model.centers - x) ** 2, axis=1))
    if r.min() <= COINCIDENCE_TOL:
        raise CoincidentPoints("evaluation point coincides with a center")
    return complex(np.dot(coeffs, _green_array(kappa(z0), r)))


def q_matrix(model: PointModel, z: complex) -> np.ndarray:
    """``Q(z) = -(beta0 + beta1 M(z))^{-1} beta1``."""
    try:
        return -nx.solve(boundary_matrix(model, z), model.beta1)
    except Singular as exc:
        raise SingularBoundaryOperator(f"beta0 + beta1 M(z) is singular at z = {z}") from exc


def _kernel_with_q(model: PointModel, k: complex, Q: np.ndarray, x: np.ndarray, y: np.ndarray) -> complex:
    rxy = float(np.linalg.norm(x - y))
    rx = np.sqrt(np.sum((model.centers - x) ** 2, axis=1))
    ry = np.sqrt(np.sum((model.centers - y) ** 2, axis=1))
    if rxy <= COINCIDENCE_TOL:
        raise CoincidentPoints("x and y coincide")
    if rx.min() <= COINCIDENCE_TOL or ry.min() <= COINCIDENCE_TOL:
        raise CoincidentPoints("evaluation point coincides with a center")
    free = cmath.exp(1j * k * rxy) / (FOUR_PI * rxy)
    return complex(free + _green_array(k, rx) @ Q @ _green_array(k, ry))


def resolvent_kernel(model: PointModel, z: complex, x, y) -> complex:
    """Integral kernel of ``(A^beta - z)^{-1}``:
    ``G_z(|x-y|) + sum_jk Q_jk(z) G_z(|x-x_j|) G_z(|x_k-y|)``."""
    k = kappa(z)
    Q = q_matrix(model, z) if np.any(model.beta1) else np.zeros((model.n, model.n), dtype=complex)
    return _kernel_with_q(model, k, Q, np.asarray(x, dtype=float), np.asarray(y, dtype=float))


@dataclass(frozen=True)
class Lattice:
    """Axis-aligned lattice: ``shape[i]`` points from ``lower[i]`` to ``upper[i]``."""

    lower: tuple
    upper: tuple
    shape: tuple

    def axes(self) -> list[np.ndarray]:
        out = []
        for lo, hi, n in zip(self.lower, self.upper, self.shape):
            out.append(np.array([lo]) if n == 1 else np.linspace(lo, hi, n))
        return out

    def points(self):
        return itertools.product(*self.axes())


def lattice_from_json(obj: dict) -> tuple[Lattice, np.ndarray]:
    """Grid file: ``{"y": [..], "lower": [..], "upper": [..], "shape": [nx, ny, nz]}``."""
    try:
        lower = tuple(float(v) for v in obj["lower"])
        upper = tuple(float(v) for v in obj["upper"])
        shape = tuple(int(v) for v in obj["shape"])
        y = np.asarray(obj["y"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"grid file needs y, lower, upper, shape ({exc})") from exc
    if not (len(lower) == len(upper) == len(shape) == 3) or y.shape != (3,):
        raise ShapeMismatch("grid entries must be 3-vectors")
    if any(n < 1 for n in shape):
        raise InputError("grid shape entries must be positive")
    return Lattice(lower, upper, shape), y


def kernel_grid(model: PointModel, z: complex, lattice: Lattice, y) -> list[tuple]:
    """Rows ``(x1, x2, x3, re, im, excluded)``; points breaking the kernel's
    preconditions are kept with ``excluded = 1`` and NaN values."""
    k = kappa(z)
    Q = q_matrix(model, z) if np.any(model.beta1) else np.zeros((model.n, model.n), dtype=complex)
    y = np.asarray(y, dtype=float)
    rows = []
    for p in lattice.points():
        x = np.array(p, dtype=float)
        try:
            v = _kernel_with_q(model, k, Q, x, y)
            rows.append((float(x[0]), float(x[1]), float(x[2]), v.real, v.imag, 0))
        except CoincidentPoints:
            rows.append((float(x[0]), float(x[1]), float(x[2]), math.nan, math.nan, 1))
    return rows


def rows_to_csv(rows: list[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2", "x3", "re", "im", "excluded"])
    for r in rows:
        w.writerow([repr(float(v)) for v in r[:5]] + [r[5]])
    return buf.getvalue()
