"""Seeded identity suite over random triplets.

Each instance draws a triplet, a general complex boundary pair, a Hermitian
pair (``beta1 = I``), a Hermitian ``B`` and eight regular sample points, then
evaluates every matrix identity of the triplet, extension and Cayley layers.
Residuals are relative to the size of the terms involved; the suite reports
the worst value per identity.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import numerics as nx
from .cayley import (
    char_context,
    characteristic_function,
    cayley_transform,
    dissipative_part,
    vartheta_identity_residual,
)
from .errors import InputError, NumericalError, Singular, SingularLambda
from .extensions import (
    BoundaryPair,
    bkv_extension,
    boundary_operator,
    boundary_pair,
    hilbert_identity_residual,
    inclusion_residual,
    inverse_extension,
    krein_resolvent,
    neumann_extension,
    q_operator,
    reconstruct_operator,
    selfadjointness_residual,
)
from .triplet import (
    OperatorTriplet,
    _complex_gaussian,
    bvp_solve,
    decomposed,
    green_form_residual,
    green_form_scale,
    m_operator,
    random_triplet,
    resolvent,
    solution_operator,
)

N_SAMPLES = 8
MAX_DIM = 64
# minimum relative smallest singular value accepted for sampled boundary operators
SAMPLE_CONDITION = 1e-6

# tolerance of each identity as a multiple of the base tolerance (1e-9 by default)
TOLERANCE_FACTORS: dict[str, float] = {
    "s_resolvent_identity": 1.0,
    "s_kernel_identity": 1.0,
    "m_difference": 1.0,
    "m_conjugate_symmetry": 0.1,
    "herglotz_identity": 1.0,
    "herglotz_psd": 0.1,
    "green_formula": 0.1,
    "bvp_boundary_data": 1.0,
    "q_difference": 1.0,
    "krein_first_resolvent": 1.0,
    "hilbert_identity": 1.0,
    "krein_consistency": 10.0,
    "inclusion": 1.0,
    "inverse_at_zero": 1.0,
    "q_representation": 1.0,
    "selfadjoint_inverse": 1.0,
    "neumann_m_inverse": 1.0,
    "neumann_resolvent": 1.0,
    "bkv_inverse": 1.0,
    "bkv_coincidence": 10.0,
    "theta_cayley": 1.0,
    "theta_contractive": 0.1,
    "vartheta_identity": 1.0,
    "u_unitary": 0.1,
    "dissipative_psd": 0.1,
}
IDENTITIES = tuple(TOLERANCE_FACTORS)


def rel(diff: np.ndarray, *terms: np.ndarray) -> float:
    scale = max(nx.fro(t) for t in terms)
    d = nx.fro(diff)
    return d / scale if scale > 0 else d


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 0
    instances: int = 100
    n_min: int = 2
    n_max: int = 12
    m_min: int = 1
    m_max: int = 4
    tol: float = 1e-9

    def validate(self) -> None:
        if self.instances < 1:
            raise InputError("instances must be at least 1")
        if not 1 <= self.n_min <= self.n_max <= MAX_DIM:
            raise InputError(f"need 1 <= n_min <= n_max <= {MAX_DIM}")
        if not 1 <= self.m_min <= self.m_max:
            raise InputError("need 1 <= m_min <= m_max")
        if self.m_min > self.n_max:
            raise InputError("m_min exceeds n_max")
        if not (self.tol > 0 and np.isfinite(self.tol)):
            raise InputError("tol must be positive and finite")

    def tolerances(self) -> dict[str, float]:
        return {k: self.tol * f for k, f in TOLERANCE_FACTORS.items()}


@dataclass
class Instance:
    T: OperatorTriplet
    P: BoundaryPair  # general complex pair
    PH: BoundaryPair  # beta0 Hermitian, beta1 = I
    B: np.ndarray
    samples: list[complex]


def _random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    H = _complex_gaussian(rng, (n, n))
    return 0.5 * (H + H.conj().T)


def _well_posed(T: OperatorTriplet, pairs: list[BoundaryPair], z: complex) -> bool:
    if T.distance_to_spectrum(z) < 0.05 * T.gap:
        return False
    for P in pairs:
        s = nx.singular_values(boundary_operator(T, P, z))
        if s[-1] < SAMPLE_CONDITION * max(s[0], 1.0):
            return False
    return True


def draw_instance(seed: int, index: int, cfg: VerifyConfig) -> Instance:
    """Deterministic instance ``index`` for ``seed``; ill-conditioned draws are redrawn from the same stream."""
    rng = np.random.default_rng([seed, index])
    for _ in range(100):
        N = int(rng.integers(cfg.n_min, cfg.n_max + 1))
        m = int(rng.integers(cfg.m_min, min(cfg.m_max, N) + 1))
        try:
            T = random_triplet(rng, N, m)
            P = boundary_pair(T, _complex_gaussian(rng, (m, m)), _complex_gaussian(rng, (m, m)))
            PH = boundary_pair(T, _random_hermitian(rng, m), np.eye(m))
        except (InputError, NumericalError):
            continue
        B = _random_hermitian(rng, N) + 2.0 * np.eye(N)
        if nx.is_singular(T.Pi.conj().T @ B @ T.Pi, 1e-8) or nx.is_singular(T.Lambda, 1e-8):
            continue
        samples: list[complex] = []
        g = T.gap
        tries = 0
        while len(samples) < N_SAMPLES and tries < 1000:
            tries += 1
            # first five in the upper half-plane, the rest in the lower one
            sign = 1.0 if len(samples) < 5 else -1.0
            z = complex(rng.uniform(-6.0, 6.0), sign * g * rng.uniform(0.1, 3.0))
            if _well_posed(T, [P, PH], z):
                samples.append(z)
        if len(samples) == N_SAMPLES:
            return Instance(T, P, PH, B, samples)
    raise NumericalError(f"could not draw a well-conditioned instance {index}")


def check_instance(inst: Instance, rng: np.random.Generator) -> dict[str, float]:
    """Worst relative residual of every identity on one instance."""
    T, P, PH, zs = inst.T, inst.P, inst.PH, inst.samples
    I_N = np.eye(T.N)
    out = {k: 0.0 for k in IDENTITIES}

    def put(name: str, value: float) -> None:
        out[name] = max(out[name], float(value))

    R = {z: resolvent(T, z) for z in zs}
    S = {z: solution_operator(T, z) for z in zs}
    Sbar = {z: solution_operator(T, z.conjugate()) for z in zs}
    M = {z: m_operator(T, z) for z in zs}
    Q = {z: q_operator(T, P, z) for z in zs}
    K = {z: krein_resolvent(T, P, z) for z in zs}
    A0Pi = T.A0 @ T.Pi

    for z in zs:
        put("s_kernel_identity", rel((T.A0 - z * I_N) @ S[z] - A0Pi, A0Pi))
        put("m_conjugate_symmetry", rel(m_operator(T, z.conjugate()) - M[z].conj().T, M[z]))
        if z.imag > 0:
            im_M = (M[z] - M[z].conj().T) / 2j
            form = z.imag * S[z].conj().T @ S[z]
            put("herglotz_identity", rel(im_M - form, im_M, form))
            lo = float(np.linalg.eigvalsh(0.5 * (im_M + im_M.conj().T))[0])
            put("herglotz_psd", max(0.0, -lo) / max(nx.spectral_norm(M[z]), 1e-300))
        d1 = decomposed(T, _complex_gaussian(rng, T.N), _complex_gaussian(rng, T.m))
        d2 = decomposed(T, _complex_gaussian(rng, T.N), _complex_gaussian(rng, T.m))
        put("green_formula", green_form_residual(T, d1, d2) / green_form_scale(T, d1, d2))
        # solution of (A - z)u = f, Gamma0 u = phi; with f = 0 it must equal S_z phi
        phi = _complex_gaussian(rng, T.m)
        sol = bvp_solve(T, z, np.zeros(T.N), phi)
        u = sol.ambient(T)
        put("bvp_boundary_data", rel(u - S[z] @ phi, S[z] @ phi))
        put("hilbert_identity", hilbert_identity_residual(T, P, z) / nx.fro(R[z]))
        put("inclusion", inclusion_residual(T, P, z))

    for z, w in zip(zs, zs[1:] + zs[:1]):
        lhs = S[z] - S[w]
        rhs = (z - w) * R[z] @ S[w]
        put("s_resolvent_identity", rel(lhs - rhs, S[z], S[w], rhs))
        lhs = M[z] - M[w]
        rhs = (z - w) * Sbar[z].conj().T @ S[w]
        put("m_difference", rel(lhs - rhs, M[z], M[w], rhs))
        lhs = Q[z] - Q[w]
        rhs = (z - w) * Q[z] @ Sbar[z].conj().T @ S[w] @ Q[w]
        put("q_difference", rel(lhs - rhs, Q[z], Q[w], rhs))
        lhs = K[z] - K[w]
        rhs = (z - w) * K[z] @ K[w]
        put("krein_first_resolvent", rel(lhs - rhs, K[z], K[w], rhs))

    op = reconstruct_operator(T, P, zs)
    put("krein_consistency", op.z_independence_residual)
    Ainv = inverse_extension(T, P)
    put("inverse_at_zero", rel(nx.inv(op.matrix) - Ainv, Ainv))
    Q0 = q_operator(T, P, 0.0)
    for z in zs[:2]:
        w = 0.1 * T.gap * z / abs(z)
        core = nx.solve(I_N - w * Ainv, T.Pi @ Q0)
        rep = Q0 + w * Q0 @ T.Pi.conj().T @ core
        Qw = q_operator(T, P, w)
        put("q_representation", rel(Qw - rep, Qw, rep))

    AHinv = inverse_extension(T, PH)
    put("selfadjoint_inverse", selfadjointness_residual(T, PH) / nx.fro(AHinv))

    try:
        neu = neumann_extension(T, zs)
        put("neumann_m_inverse", neu.m_inverse_residual)
        put("neumann_resolvent", neu.resolvent_residual)
    except SingularLambda:
        pass
    LB, inv_res, coincide = bkv_extension(T, inst.B, zs)
    put("bkv_inverse", inv_res)
    put("bkv_coincidence", coincide)

    ctx = char_context(T)
    put("u_unitary", nx.fro(ctx.U.conj().T @ ctx.U - np.eye(T.m)) / np.sqrt(T.m))
    dp = dissipative_part(ctx)
    lo = float(np.linalg.eigvalsh(0.5 * (dp + dp.conj().T))[0])
    put("dissipative_psd", max(0.0, -lo) / max(nx.spectral_norm(ctx.T_op), 1.0))
    for z in zs:
        if z.imag > 0:
            th_c = cayley_transform(T, z)
            th_f = characteristic_function(ctx, T, z)
            put("theta_cayley", rel(th_c - th_f, th_c, th_f))
            put("theta_contractive", max(0.0, nx.spectral_norm(th_c) - 1.0))
        else:
            lhs_scale = nx.fro(ctx.U) + nx.fro(characteristic_function(ctx, T, z.conjugate()))
            put("vartheta_identity", vartheta_identity_residual(ctx, T, z) / lhs_scale)
    return out


def _run_one(args: tuple[int, int, VerifyConfig]) -> dict[str, float]:
    seed, index, cfg = args
    inst = draw_instance(seed, index, cfg)
    rng = np.random.default_rng([seed, index, 1])
    try:
        return check_instance(inst, rng)
    except Singular as exc:
        raise NumericalError(f"instance {index}: {exc}") from exc


def thread_count() -> int:
    raw = os.environ.get("KREINLAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"KREINLAB_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise InputError("KREINLAB_THREADS must be non-negative")
    return n if n > 0 else (os.cpu_count() or 1)


def run_suite(cfg: VerifyConfig, threads: int = 1) -> dict:
    """Run the suite and return the JSON-ready report (no timing information)."""
    cfg.validate()
    jobs = [(cfg.seed, i, cfg) for i in range(cfg.instances)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_one, jobs))  # map keeps submission order
    else:
        results = [_run_one(j) for j in jobs]
    tols = cfg.tolerances()
    worst = {k: 0.0 for k in IDENTITIES}
    where = {k: 0 for k in IDENTITIES}
    for i, res in enumerate(results):
        for k, v in res.items():
            if v > worst[k]:
                worst[k], where[k] = v, i
    failed = sorted(k for k in IDENTITIES if not worst[k] <= tols[k])
    return {
        "tool": "kreinlab",
        "version": __version__,
        "command": "verify",
        "seed": cfg.seed,
        "instances": cfg.instances,
        "N_range": [cfg.n_min, cfg.n_max],
        "m_range": [cfg.m_min, cfg.m_max],
        "samples_per_instance": N_SAMPLES,
        "base_tolerance": cfg.tol,
        "tolerances": tols,
        "worst_residuals": worst,
        "worst_instance": where,
        "failed": failed,
        "pass": not failed,
    }
