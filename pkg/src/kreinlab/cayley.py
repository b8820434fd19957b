"""Cayley transform of M(z) and the characteristic function of the dissipative
extension ``L`` (boundary condition ``(Gamma1 - i Gamma0) u = 0``).

``L`` itself is available as ``reconstruct_operator(T, dissipative_pair(T))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics as nx
from .errors import InputError, Singular, SingularPencil, SingularShift
from .extensions import BoundaryPair
from .triplet import OperatorTriplet, m_operator


@dataclass(frozen=True, eq=False)
class CharFnContext:
    T_op: np.ndarray  # L^{-1} = A0^{-1} - Pi (Lambda - i)^{-1} Pi^*
    U: np.ndarray  # (Lambda - i)(Lambda + i)^{-1}, unitary
    plus_inv: np.ndarray  # (Lambda + i)^{-1}
    minus_inv: np.ndarray  # (Lambda - i)^{-1}


def char_context(T: OperatorTriplet) -> CharFnContext:
    iI = 1j * np.eye(T.m)
    plus_inv = nx.inv(T.Lambda + iI)
    minus_inv = nx.inv(T.Lambda - iI)
    T_op = T.A0_inv - T.Pi @ minus_inv @ T.Pi.conj().T
    U = (T.Lambda - iI) @ plus_inv
    return CharFnContext(T_op, U, plus_inv, minus_inv)


def dissipative_pair(T: OperatorTriplet) -> BoundaryPair:
    return BoundaryPair(-1j * np.eye(T.m), np.eye(T.m, dtype=complex))


def dissipative_part(ctx: CharFnContext) -> np.ndarray:
    """``Im(T_op^*) = (T_op^* - T_op) / 2i``, positive semidefinite."""
    Ts = ctx.T_op.conj().T
    return (Ts - ctx.T_op) / 2j


def cayley_transform(T: OperatorTriplet, z: complex) -> np.ndarray:
    """``Theta(z) = (M(z) - i)(M(z) + i)^{-1}``."""
    M = m_operator(T, z)
    iI = 1j * np.eye(T.m)
    try:
        # X (M + i) = (M - i)  <=>  (M + i)^* X^* = (M - i)^*
        return nx.solve((M + iI).conj().T, (M - iI).conj().T).conj().T
    except Singular as exc:
        raise SingularShift(f"M(z) + i is singular at z = {z}") from exc


def characteristic_function(ctx: CharFnContext, T: OperatorTriplet, z: complex) -> np.ndarray:
    """``U + 2iz (Lambda + i)^{-1} Pi^* (I - z T_op^*)^{-1} Pi (Lambda + i)^{-1}``."""
    z = complex(z)
    pencil = np.eye(T.N) - z * ctx.T_op.conj().T
    try:
        core = nx.solve(pencil, T.Pi @ ctx.plus_inv)
    except Singular as exc:
        raise SingularPencil(f"I - z T^* is singular at z = {z}") from exc
    return ctx.U + 2j * z * ctx.plus_inv @ T.Pi.conj().T @ core


def vartheta(ctx: CharFnContext, T: OperatorTriplet, zeta: complex) -> np.ndarray:
    """Characteristic function of ``T_op^*``:
    ``I + 2i (Lambda + i)^{-1} Pi^* (T_op - zeta)^{-1} Pi (Lambda - i)^{-1}``."""
    zeta = complex(zeta)
    try:
        core = nx.solve(ctx.T_op - zeta * np.eye(T.N), T.Pi @ ctx.minus_inv)
    except Singular as exc:
        raise SingularPencil(f"T - zeta is singular at zeta = {zeta}") from exc
    return np.eye(T.m) + 2j * ctx.plus_inv @ T.Pi.conj().T @ core


# 1/z beyond this multiple of ||T_op|| leaves the correction term below rounding
PENCIL_RADIUS = 1e12


def vartheta_identity_residual(ctx: CharFnContext, T: OperatorTriplet, z: complex) -> float:
    """Frobenius residual of ``vartheta(1/z) - U Theta(conj z)^*`` for ``Im z < 0``."""
    z = complex(z)
    if not z.imag < 0:
        raise InputError("identity is stated for z in the lower half-plane")
    if abs(z) == 0 or 1.0 / abs(z) > PENCIL_RADIUS * max(nx.spectral_norm(ctx.T_op), 1.0):
        raise SingularPencil(f"1/z = {1 / z if z else 'inf'} lies outside the pencil radius")
    lhs = vartheta(ctx, T, 1.0 / z)
    theta = characteristic_function(ctx, T, z.conjugate())
    return nx.fro(lhs - ctx.U @ theta.conj().T)
