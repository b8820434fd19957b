"""Extensions defined by boundary conditions ``(beta0 Gamma0 + beta1 Gamma1) u = 0``.

The operator ``A_beta`` is only known through its resolvent, given by Krein's
formula ``R_z + S_z Q(z) S_{conj z}^*`` with ``Q(z) = -(beta0 + beta1 M(z))^{-1} beta1``.
It is reconstructed from the resolvent at one point and certified at others.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from . import rootfind
from .errors import (
    DegeneratePair,
    InsufficientSamples,
    NoPhaseConvergence,
    ResolventSingular,
    ShapeMismatch,
    Singular,
    SingularBoundaryOperator,
    SingularLambda,
    SingularPiBPi,
    ZeroOnContour,
)
from .triplet import OperatorTriplet, m_operator, resolvent, solution_operator

KERNEL_REL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class BoundaryPair:
    beta0: np.ndarray
    beta1: np.ndarray

    @property
    def m(self) -> int:
        return self.beta0.shape[0]

    def to_json(self) -> dict:
        return {"beta0": nx.matrix_to_json(self.beta0), "beta1": nx.matrix_to_json(self.beta1)}


def boundary_pair(T: OperatorTriplet, beta0, beta1) -> BoundaryPair:
    """Validate ``(beta0, beta1)`` against ``T``: shapes and invertibility of
    ``beta0 + beta1 Lambda``."""
    b0 = nx.as_matrix(beta0, "beta0")
    b1 = nx.as_matrix(beta1, "beta1")
    if b0.shape != (T.m, T.m) or b1.shape != (T.m, T.m):
        raise ShapeMismatch(f"beta0, beta1 must be {T.m}x{T.m}")
    if not np.any(b0) and not np.any(b1):
        raise DegeneratePair("beta0 = beta1 = 0 is not a boundary condition")
    if nx.is_singular(b0 + b1 @ T.Lambda):
        raise SingularBoundaryOperator("beta0 + beta1 Lambda is not invertible")
    return BoundaryPair(b0, b1)


def pair_from_json(T: OperatorTriplet, obj: dict) -> BoundaryPair:
    try:
        b0 = nx.matrix_from_json(obj["beta0"], "beta0")
        b1 = nx.matrix_from_json(obj["beta1"], "beta1")
    except (KeyError, TypeError) as exc:
        raise ShapeMismatch(f"pair file needs keys beta0, beta1 ({exc})") from exc
    return boundary_pair(T, b0, b1)


def boundary_operator(T: OperatorTriplet, P: BoundaryPair, z: complex) -> np.ndarray:
    """``beta0 + beta1 M(z)``."""
    return P.beta0 + P.beta1 @ m_operator(T, z)


def q_operator(T: OperatorTriplet, P: BoundaryPair, z: complex) -> np.ndarray:
    """``Q(z) = -(beta0 + beta1 M(z))^{-1} beta1``."""
    B = boundary_operator(T, P, z)
    try:
        return -nx.solve(B, P.beta1)
    except Singular as exc:
        raise SingularBoundaryOperator(
            f"beta0 + beta1 M(z) is singular at z = {z}; z may be an eigenvalue of A_beta") from exc


def krein_resolvent(T: OperatorTriplet, P: BoundaryPair, z: complex) -> np.ndarray:
    """``R_z + S_z Q(z) S_{conj z}^*``."""
    z = complex(z)
    R = resolvent(T, z)
    S = solution_operator(T, z)
    S_bar = solution_operator(T, z.conjugate())
    return R + S @ q_operator(T, P, z) @ S_bar.conj().T


def hilbert_identity_residual(T: OperatorTriplet, P: BoundaryPair, z: complex) -> float:
    """Frobenius residual of ``(A_beta - z)^{-1} - R_z = [Gamma1 R_{conj z}]^* Gamma0 (A_beta - z)^{-1}``.

    ``Gamma1 R_{conj z} = S_z^*`` and ``Gamma0 (A_beta - z)^{-1} = Q(z) Gamma1 R_z``; the
    latter is built from ``Gamma1`` applied columnwise to ``R_z`` (decomposition
    ``R_z = A0^{-1} (A0 R_z)``), independently of the solution operator.
    """
    z = complex(z)
    R = resolvent(T, z)
    gamma1_Rz = T.Pi.conj().T @ (T.A0 @ R)
    gamma1_Rzbar = T.Pi.conj().T @ (T.A0 @ resolvent(T, z.conjugate()))
    gamma0_res = q_operator(T, P, z) @ gamma1_Rz
    return nx.fro(krein_resolvent(T, P, z) - R - gamma1_Rzbar.conj().T @ gamma0_res)


@dataclass(frozen=True, eq=False)
class ExtensionOperator:
    matrix: np.ndarray
    z_independence_residual: float
    samples_used: list
    skipped_samples: list = field(default_factory=list)


def default_samples(T: OperatorTriplet) -> list[complex]:
    g = T.gap
    return [0j, 0.37j * g, complex(-0.71 * g, 0.29 * g)]


def reconstruct_operator(T: OperatorTriplet, P: BoundaryPair, z_samples=None) -> ExtensionOperator:
    """``A_beta = z0 + R(z0)^{-1}`` from the first usable sample, certified at the rest.

    Samples where the Krein resolvent is singular are skipped; fewer than two
    usable samples raises :class:`InsufficientSamples`.
    """
    samples = [complex(z) for z in (default_samples(T) if z_samples is None else z_samples)]
    if len(samples) < 2:
        raise InsufficientSamples("need at least two z samples")
    resolvents, used, skipped = [], [], []
    for z in samples:
        try:
            Rk = krein_resolvent(T, P, z)
        except SingularBoundaryOperator:
            skipped.append(z)
            continue
        if nx.is_singular(Rk):
            skipped.append(z)
            continue
        resolvents.append(Rk)
        used.append(z)
    if not used:
        raise ResolventSingular("Krein resolvent is singular at every sample")
    if len(used) < 2:
        raise InsufficientSamples(f"only {len(used)} usable sample(s); skipped {skipped}")
    z0 = used[0]
    A = z0 * np.eye(T.N) + nx.inv(resolvents[0])
    worst = 0.0
    for z, Rk in zip(used[1:], resolvents[1:]):
        try:
            direct = nx.inv(A - z * np.eye(T.N))
        except Singular as exc:
            raise ResolventSingular(f"reconstructed operator has {z} in its spectrum") from exc
        worst = max(worst, nx.fro(direct - Rk) / nx.fro(Rk))
    return ExtensionOperator(A, worst, used, skipped)


def inverse_extension(T: OperatorTriplet, P: BoundaryPair) -> np.ndarray:
    """``A_beta^{-1} = A0^{-1} + Pi Q(0) Pi^*``."""
    Q0 = -nx.solve(P.beta0 + P.beta1 @ T.Lambda, P.beta1)
    return T.A0_inv + T.Pi @ Q0 @ T.Pi.conj().T


def selfadjointness_residual(T: OperatorTriplet, P: BoundaryPair) -> float:
    """``||A_beta^{-1} - (A_beta^{-1})^*||_F``; small whenever ``beta0 beta1^*`` is Hermitian."""
    try:
        Ainv = inverse_extension(T, P)
    except Singular as exc:
        raise SingularBoundaryOperator("beta0 + beta1 Lambda is not invertible") from exc
    return nx.fro(Ainv - Ainv.conj().T)


@dataclass(frozen=True, eq=False)
class NeumannExtension:
    """``A1`` (``beta0 = 0, beta1 = I``) with residuals of its two resolvent representations."""

    operator: ExtensionOperator
    inverse: np.ndarray
    m_inverse_residual: float
    resolvent_residual: float
    samples: list


def neumann_extension(T: OperatorTriplet, z_samples=None) -> NeumannExtension:
    """``A1^{-1} = A0^{-1} - Pi Lambda^{-1} Pi^*``.

    At each sample z (regular for A0 and A1) two relative residuals are recorded:
    ``M(z)^{-1} = Lambda^{-1} - z Lambda^{-1} Pi^* (I - z A1^{-1})^{-1} Pi Lambda^{-1}``, and
    ``(A1 - z)^{-1} = R_z - W pi M(z) pi^* W`` with ``W = (I - z A1^{-1})^{-1}`` and
    ``pi = -Pi Lambda^{-1}``.
    """
    try:
        L_inv = nx.inv(T.Lambda)
    except Singular as exc:
        raise SingularLambda("Lambda is not invertible") from exc
    A1_inv = T.A0_inv - T.Pi @ L_inv @ T.Pi.conj().T
    P = BoundaryPair(np.zeros((T.m, T.m), dtype=complex), np.eye(T.m, dtype=complex))
    op = reconstruct_operator(T, P, z_samples)
    I = np.eye(T.N)
    pi = -T.Pi @ L_inv
    worst_m, worst_r = 0.0, 0.0
    for z in op.samples_used[1:]:
        W = nx.inv(I - z * A1_inv)
        M = m_operator(T, z)
        m_inv_formula = L_inv - z * L_inv @ T.Pi.conj().T @ W @ T.Pi @ L_inv
        worst_m = max(worst_m, _rel(nx.inv(M) - m_inv_formula, nx.inv(M), m_inv_formula))
        lhs = nx.inv(nx.inv(A1_inv) - z * I)
        rhs = resolvent(T, z) - W @ pi @ M @ pi.conj().T @ W
        worst_r = max(worst_r, _rel(lhs - rhs, lhs, rhs))
    return NeumannExtension(op, A1_inv, worst_m, worst_r, list(op.samples_used[1:]))


def bkv_extension(T: OperatorTriplet, B, z_samples=None) -> tuple[ExtensionOperator, float, float]:
    """``L_B^{-1} = A0^{-1} + Pi (Pi^* B Pi)^{-1} Pi^*``.

    Returns ``(operator, inverse_residual, coincidence_residual)``: the operator
    is ``L_B``; the first residual compares ``L_B^{-1}`` with the closed form,
    the second compares ``L_B`` with the reconstruction for
    ``(beta0, beta1) = (Lambda + Pi^* B Pi, -I)`` (both relative, Frobenius).
    """
    B = nx.as_matrix(B, "B")
    if B.shape != (T.N, T.N):
        raise ShapeMismatch(f"B must be {T.N}x{T.N}")
    PBP = T.Pi.conj().T @ B @ T.Pi
    try:
        core = nx.inv(PBP)
    except Singular as exc:
        raise SingularPiBPi("Pi^* B Pi is not invertible") from exc
    LB_inv = T.A0_inv + T.Pi @ core @ T.Pi.conj().T
    try:
        LB = nx.inv(LB_inv)
    except Singular as exc:
        raise ResolventSingular("L_B^{-1} is singular") from exc
    P = BoundaryPair(T.Lambda + PBP, -np.eye(T.m, dtype=complex))
    rec = reconstruct_operator(T, P, z_samples)
    inv_res = _rel(nx.inv(LB) - LB_inv, LB_inv)
    coincide = _rel(rec.matrix - LB, LB)
    return ExtensionOperator(LB, rec.z_independence_residual, rec.samples_used), inv_res, coincide


def minimal_domain_basis(T: OperatorTriplet) -> np.ndarray:
    """Orthonormal basis of ``A0^{-1} Ker(Pi^*)`` (N x (N - m))."""
    if T.m == T.N:
        return np.zeros((T.N, 0), dtype=complex)
    u, _, _ = np.linalg.svd(T.Pi)
    ker = u[:, T.m:]  # orthonormal complement of Ran(Pi)
    q, _ = np.linalg.qr(T.A0_inv @ ker)
    return q


def inclusion_residual(T: OperatorTriplet, P: BoundaryPair, z: complex) -> float:
    """Relative residual of ``R_beta(z) (A0 - z) u = u`` over the minimal-domain basis."""
    U = minimal_domain_basis(T)
    if U.shape[1] == 0:
        return 0.0
    z = complex(z)
    image = krein_resolvent(T, P, z) @ ((T.A0 - z * np.eye(T.N)) @ U)
    return nx.fro(image - U) / nx.fro(U)


def secular(T: OperatorTriplet, P: BoundaryPair, z: complex) -> nx.LogDet:
    """``log det(beta0 + beta1 M(z))``."""
    return nx.log_det(boundary_operator(T, P, z))


def kernel_basis(T: OperatorTriplet, P: BoundaryPair, z: complex, rel_tol: float = KERNEL_REL_TOL,
                 location_error: float = 0.0) -> np.ndarray:
    """Numerical kernel of ``beta0 + beta1 M(z)``.

    Singular values are compared with ``||beta0|| + ||beta1|| (||Lambda|| + ||M(z) - Lambda||)``,
    the size of the terms being added, so that cancellation inside the sum
    (which is what happens at a root) does not shrink the yardstick.

    ``location_error`` is a bound on the distance from ``z`` to the true root.
    Since ``M'(z) = S_{conj z}^* S_z``, the matrix moves by at most
    ``location_error ||beta1|| ||S_{conj z}|| ||S_z||`` over that distance, and
    this is added to the threshold.
    """
    M = m_operator(T, z)
    b1 = nx.spectral_norm(P.beta1)
    terms = nx.spectral_norm(T.Lambda) + nx.spectral_norm(M - T.Lambda)
    scale = nx.spectral_norm(P.beta0) + b1 * terms
    if location_error > 0:
        drift = b1 * nx.spectral_norm(solution_operator(T, z.conjugate())) * nx.spectral_norm(solution_operator(T, z))
        scale += location_error * drift / rel_tol
    return nx.nullspace(P.beta0 + P.beta1 @ M, rel_tol, scale)


# -- spectrum correspondence ------------------------------------------------

@dataclass
class SpectrumReport:
    secular_roots: list  # [(z, kernel_dim)]
    operator_eigenvalues: list  # distinct eigenvalues of A_beta
    multiplicities: list  # geometric multiplicities, aligned with operator_eigenvalues
    matching: list  # [(root_index, eigen_index, distance)]
    unmatched_roots: list
    unmatched_eigenvalues: list  # [(eigen_index, reason)]
    tolerance: float
    method: str
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        flagged = [r for _, r in self.unmatched_eigenvalues if r != "near_spectrum_A0"]
        kernel_ok = all(self.secular_roots[i][1] == self.multiplicities[j] for i, j, _ in self.matching)
        return not flagged and not self.unmatched_roots and kernel_ok

    def to_json(self) -> dict:
        c = _pair
        return {
            "secular_roots": [{"z": c(z), "kernel_dim": int(k)} for z, k in self.secular_roots],
            "operator_eigenvalues": [
                {"z": c(z), "geometric_multiplicity": int(g)}
                for z, g in zip(self.operator_eigenvalues, self.multiplicities)
            ],
            "matching": [
                {"root": int(i), "eigenvalue": int(j), "distance": float(d)} for i, j, d in self.matching
            ],
            "unmatched_roots": [int(i) for i in self.unmatched_roots],
            "unmatched_eigenvalues": [{"eigenvalue": int(j), "reason": r} for j, r in self.unmatched_eigenvalues],
            "tolerance": self.tolerance,
            "method": self.method,
            "residuals": self.residuals,
            "ok": self.ok,
        }


def cluster_eigenvalues(w: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    """Group eigenvalues closer than ``tol`` (single linkage); returns (mean, size)."""
    remaining = list(w)
    clusters: list[list[complex]] = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for x in list(remaining):
                if any(abs(x - y) <= tol for y in group):
                    group.append(x)
                    remaining.remove(x)
                    grew = True
        clusters.append(group)
    return [(complex(np.mean(g)), len(g)) for g in clusters]


def geometric_multiplicity(A: np.ndarray, lam: complex, rel_tol: float = 1e-8) -> int:
    s = nx.singular_values(A - lam * np.eye(A.shape[0]))
    return int(np.count_nonzero(s <= rel_tol * max(s[0], abs(lam), 1.0)))


def _hermitian_form(P: BoundaryPair) -> np.ndarray | None:
    """``beta1^{-1} beta0`` when it is Hermitian, else None.

    Then ``det(beta0 + beta1 M(x)) = det(beta1) det(H + M(x))`` and ``H + M(x)`` is
    Hermitian and strictly increasing in real x between poles.
    """
    if nx.is_singular(P.beta1):
        return None
    H = nx.solve(P.beta1, P.beta0)
    if not nx.is_hermitian(H, 1e-10) and nx.fro(H) > 0:
        return None
    return 0.5 * (H + H.conj().T)


def real_secular_roots(T: OperatorTriplet, H: np.ndarray, lo: float, hi: float,
                       samples_per_interval: int = 64) -> list[tuple[float, int]]:
    """Real zeros of ``det(H + M(x))`` on ``[lo, hi]`` for Hermitian ``H``.

    ``H + M(x)`` increases strictly between poles, so the interval is cut at the
    eigenvalues of A0 and each piece goes to
    :func:`rootfind.increasing_hermitian_zeros`.
    """
    delta = 4.0 * T.spectral_threshold
    cuts = [lo] + [float(e) for e in T.spectrum if lo < e < hi] + [hi]

    def K(x: float) -> np.ndarray:
        return H + m_operator(T, x)

    roots: list[tuple[float, int]] = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        a_ = a + delta if a != lo else a
        b_ = b - delta if b != hi else b
        if a_ < b_:
            roots.extend(rootfind.increasing_hermitian_zeros(K, a_, b_, samples_per_interval))
    return roots


def eigen_correspondence(T: OperatorTriplet, P: BoundaryPair, tol: float = 1e-6,
                         z_samples=None) -> SpectrumReport:
    """Match eigenvalues of the reconstructed ``A_beta`` lying off spec(A0) with
    zeros of ``det(beta0 + beta1 M(z))``.

    Real-axis zeros (when ``beta1^{-1} beta0`` is Hermitian) are located by
    scanning and bisection; otherwise each eigenvalue is enclosed in a small
    rectangle and the zeros inside are isolated by winding counts.  The kernel
    dimension at each zero is the number of singular values of
    ``beta0 + beta1 M(z0)`` below ``1e-8`` times its norm.
    """
    op = reconstruct_operator(T, P, z_samples)
    A = op.matrix
    normA = nx.spectral_norm(A)
    eig = nx.eig_general(A)
    clusters = cluster_eigenvalues(eig, max(1e-7 * max(normA, 1.0), 0.1 * tol))
    eigs = [c for c, _ in clusters]
    geo = [geometric_multiplicity(A, c) for c in eigs]
    threshold = max(T.spectral_threshold, tol)
    inside = [j for j, c in enumerate(eigs) if T.distance_to_spectrum(c) > threshold]
    unmatched_eigs = [(j, "near_spectrum_A0") for j, c in enumerate(eigs) if j not in inside]

    H = _hermitian_form(P)
    roots: list[tuple[complex, int]] = []
    if H is not None:
        method = "real_axis_scan"
        R = 1.1 * normA + T.gap + 1.0
        for x, _ in real_secular_roots(T, H, -R, R):
            z0 = complex(x)
            if T.distance_to_spectrum(z0) > threshold:
                roots.append((z0, kernel_basis(T, P, z0).shape[1]))
    else:
        method = "winding_subdivision"
        roots = _complex_roots(T, P, [eigs[j] for j in inside], eigs, tol)

    matching, used_roots, used_eigs = [], set(), set()
    pairs = sorted(
        ((abs(z - eigs[j]), i, j) for i, (z, _) in enumerate(roots) for j in inside),
        key=lambda t: t[0],
    )
    for d, i, j in pairs:
        if d > tol or i in used_roots or j in used_eigs:
            continue
        matching.append((i, j, float(d)))
        used_roots.add(i)
        used_eigs.add(j)
    matching.sort()
    unmatched_roots = [i for i in range(len(roots)) if i not in used_roots]
    unmatched_eigs += [(j, "no_secular_root") for j in inside if j not in used_eigs]
    unmatched_eigs.sort()
    residuals = {"z_independence": op.z_independence_residual}
    return SpectrumReport(roots, eigs, geo, matching, unmatched_roots, unmatched_eigs, tol, method, residuals)


def _complex_roots(T: OperatorTriplet, P: BoundaryPair, targets: list[complex], all_eigs: list[complex],
                   tol: float) -> list[tuple[complex, int]]:
    def f(w: complex):
        return secular(T, P, w)

    roots: list[tuple[complex, int]] = []
    for c in targets:
        others = [abs(c - e) for e in all_eigs if e != c]
        h = 0.25 * min([T.distance_to_spectrum(c)] + others + [max(1.0, abs(c))])
        # off-centre box: the first split must not put a corner on the zero
        rect = rootfind.Rectangle.around(c + h * complex(0.0917, -0.0631), h * 0.9731, h * 1.0213)
        try:
            cells = rootfind.locate_zeros(f, rect, size_tol=1e-13 * (1 + abs(c)))
        except (ZeroOnContour, NoPhaseConvergence):
            continue
        for center, count, radius in cells:
            roots.append((center, kernel_basis(T, P, center, location_error=radius).shape[1]))
    roots.sort(key=lambda t: (t[0].real, t[0].imag))
    return roots


def _pair(w) -> list[float]:
    w = complex(w)
    return [float(w.real), float(w.imag)]


def _rel(diff: np.ndarray, *terms: np.ndarray) -> float:
    scale = max(nx.fro(t) for t in terms)
    return nx.fro(diff) / scale if scale > 0 else nx.fro(diff)
