"""Finite-dimensional triplets {A0, Pi, Lambda} and their M-operator.

A triplet lives on ``H = C^N`` (state space) and ``E = C^m`` (boundary space):

* ``A0``     -- Hermitian, invertible N x N matrix;
* ``Pi``     -- N x m matrix of full column rank (the channel ``E -> H``);
* ``Lambda`` -- Hermitian m x m matrix, the value of the second boundary map
  on the range of ``Pi``.

Elements of the maximal domain are written ``u = A0^{-1} f + Pi phi``.  In
finite dimensions that splitting is not unique, so the pair ``(f, phi)`` is
stored explicitly in :class:`DecomposedVector` and the boundary maps act on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .errors import AtSpectrum, NotHermitian, NotInvertible, RankDeficient, ShapeMismatch

HERMITIAN_TOL = 1e-10
INVERTIBLE_TOL = 1e-8
RANK_TOL = 1e-10
GAP_FRACTION = 1e-8


@dataclass(frozen=True, eq=False)
class OperatorTriplet:
    A0: np.ndarray
    Pi: np.ndarray
    Lambda: np.ndarray
    # cached spectral data of A0, filled by validate_triplet
    spectrum: np.ndarray = field(repr=False)
    A0_inv: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.A0.shape[0]

    @property
    def m(self) -> int:
        return self.Pi.shape[1]

    @property
    def norm_A0(self) -> float:
        return float(np.max(np.abs(self.spectrum)))

    @property
    def gap(self) -> float:
        """Distance from 0 to the spectrum of A0."""
        return float(np.min(np.abs(self.spectrum)))

    @property
    def spectral_threshold(self) -> float:
        return GAP_FRACTION * self.norm_A0

    def distance_to_spectrum(self, z: complex) -> float:
        return float(np.min(np.abs(self.spectrum - z)))

    def to_json(self) -> dict:
        return {
            "A0": nx.matrix_to_json(self.A0),
            "Pi": nx.matrix_to_json(self.Pi),
            "Lambda": nx.matrix_to_json(self.Lambda),
        }


def validate_triplet(A0, Pi, Lambda) -> OperatorTriplet:
    """Check shapes and the standing assumptions, return an :class:`OperatorTriplet`."""
    A0 = nx.as_matrix(A0, "A0")
    Pi = nx.as_matrix(Pi, "Pi")
    Lambda = nx.as_matrix(Lambda, "Lambda")
    N, m = Pi.shape
    if A0.shape != (N, N):
        raise ShapeMismatch(f"A0 is {A0.shape}, expected ({N}, {N}) to match Pi {Pi.shape}")
    if Lambda.shape != (m, m):
        raise ShapeMismatch(f"Lambda is {Lambda.shape}, expected ({m}, {m})")
    if m > N:
        raise ShapeMismatch(f"boundary dimension m={m} exceeds N={N}")
    if not nx.is_hermitian(A0, HERMITIAN_TOL):
        raise NotHermitian("A0 is not Hermitian")
    if not nx.is_hermitian(Lambda, HERMITIAN_TOL):
        raise NotHermitian("Lambda is not Hermitian")
    spectrum = np.linalg.eigvalsh(0.5 * (A0 + A0.conj().T))
    abs_spec = np.abs(spectrum)
    if abs_spec.min() < INVERTIBLE_TOL * abs_spec.max() or abs_spec.max() == 0:
        raise NotInvertible("A0 is not invertible")
    s = nx.singular_values(Pi)
    if s[0] == 0 or s[-1] < RANK_TOL * s[0]:
        raise RankDeficient("Pi does not have full column rank")
    return OperatorTriplet(A0, Pi, Lambda, spectrum, nx.inv(A0))


def _check_regular(T: OperatorTriplet, z: complex) -> None:
    if T.distance_to_spectrum(z) < T.spectral_threshold:
        raise AtSpectrum(f"z = {z} lies on the spectrum of A0")


def resolvent(T: OperatorTriplet, z: complex) -> np.ndarray:
    """``R_z = (A0 - z)^{-1}``."""
    z = complex(z)
    _check_regular(T, z)
    return nx.solve(T.A0 - z * np.eye(T.N), np.eye(T.N, dtype=complex))


def solution_operator(T: OperatorTriplet, z: complex) -> np.ndarray:
    """``S_z = (I - z A0^{-1})^{-1} Pi``, computed as ``Pi + z R_z Pi``."""
    z = complex(z)
    _check_regular(T, z)
    return T.Pi + z * nx.solve(T.A0 - z * np.eye(T.N), T.Pi)


def m_operator(T: OperatorTriplet, z: complex) -> np.ndarray:
    """``M(z) = Lambda + z Pi^* S_z``."""
    z = complex(z)
    return T.Lambda + z * (T.Pi.conj().T @ solution_operator(T, z))


@dataclass(frozen=True, eq=False)
class DecomposedVector:
    """``u = A0^{-1} f + Pi phi`` carried as the pair ``(f, phi)``."""

    f: np.ndarray
    phi: np.ndarray

    def ambient(self, T: OperatorTriplet) -> np.ndarray:
        return T.A0_inv @ self.f + T.Pi @ self.phi


def decomposed(T: OperatorTriplet, f=None, phi=None) -> DecomposedVector:
    f = np.zeros(T.N, dtype=complex) if f is None else np.asarray(f, dtype=complex).reshape(-1)
    phi = np.zeros(T.m, dtype=complex) if phi is None else np.asarray(phi, dtype=complex).reshape(-1)
    if f.shape != (T.N,) or phi.shape != (T.m,):
        raise ShapeMismatch(f"expected f of length {T.N} and phi of length {T.m}")
    return DecomposedVector(f, phi)


def bvp_solve(T: OperatorTriplet, z: complex, f, phi) -> DecomposedVector:
    """Solve ``(A - z) u = f``, ``Gamma0 u = phi``.

    The solution ``R_z f + S_z phi`` is rewritten as
    ``A0^{-1} f' + Pi phi`` with ``f' = A0 (A0 - z)^{-1} (f + z Pi phi)``.
    """
    z = complex(z)
    d = decomposed(T, f, phi)
    _check_regular(T, z)
    g = d.f + z * (T.Pi @ d.phi)
    f_new = g + z * nx.solve(T.A0 - z * np.eye(T.N), g)
    return DecomposedVector(f_new, d.phi.copy())


def gamma0(d: DecomposedVector) -> np.ndarray:
    return d.phi


def gamma1(T: OperatorTriplet, d: DecomposedVector) -> np.ndarray:
    return T.Pi.conj().T @ d.f + T.Lambda @ d.phi


def a_apply(d: DecomposedVector) -> np.ndarray:
    return d.f


def green_form_residual(T: OperatorTriplet, d1: DecomposedVector, d2: DecomposedVector) -> float:
    """``|(Au,v) - (u,Av) - (G1 u, G0 v) + (G0 u, G1 v)|`` with ``(x, y) = y^* x``."""
    u, v = d1.ambient(T), d2.ambient(T)
    lhs = np.vdot(v, a_apply(d1)) - np.vdot(a_apply(d2), u)
    rhs = np.vdot(gamma0(d2), gamma1(T, d1)) - np.vdot(gamma1(T, d2), gamma0(d1))
    return float(abs(lhs - rhs))


def green_form_scale(T: OperatorTriplet, d1: DecomposedVector, d2: DecomposedVector) -> float:
    """Natural size of the terms entering :func:`green_form_residual`."""
    n1 = np.linalg.norm(d1.f) + np.linalg.norm(d1.phi)
    n2 = np.linalg.norm(d2.f) + np.linalg.norm(d2.phi)
    ops = 1.0 + nx.spectral_norm(T.A0_inv) + nx.spectral_norm(T.Pi) + nx.spectral_norm(T.Lambda)
    return float(n1 * n2 * ops)


def random_triplet(rng: np.random.Generator, N: int, m: int) -> OperatorTriplet:
    """Seeded random instance.

    ``A0 = U diag(lam) U^*`` with Haar-distributed ``U`` and ``|lam|`` uniform in
    [0.5, 5] with random signs; ``Pi`` a complex Gaussian with orthonormalized
    columns; ``Lambda`` a random Hermitian matrix of spectral norm at most 2.
    """
    if not 1 <= m <= N:
        raise ShapeMismatch(f"need 1 <= m <= N, got m={m}, N={N}")
    U = haar_unitary(rng, N)
    lam = rng.uniform(0.5, 5.0, N) * rng.choice([-1.0, 1.0], N)
    A0 = (U * lam) @ U.conj().T
    A0 = 0.5 * (A0 + A0.conj().T)
    Pi, _ = np.linalg.qr(_complex_gaussian(rng, (N, m)))
    H = _complex_gaussian(rng, (m, m))
    H = 0.5 * (H + H.conj().T)
    Lambda = H * (rng.uniform(0.2, 2.0) / nx.spectral_norm(H))
    return validate_triplet(A0, Pi, Lambda)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_complex_gaussian(rng, (n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def triplet_from_json(obj: dict) -> OperatorTriplet:
    try:
        parts = [nx.matrix_from_json(obj[k], k) for k in ("A0", "Pi", "Lambda")]
    except (KeyError, TypeError) as exc:
        raise ShapeMismatch(f"triplet file needs keys A0, Pi, Lambda ({exc})") from exc
    return validate_triplet(*parts)
