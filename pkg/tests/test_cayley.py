from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given

from kreinlab import numerics as nx
from kreinlab.cayley import (
    cayley_transform,
    char_context,
    characteristic_function,
    dissipative_pair,
    dissipative_part,
    vartheta,
    vartheta_identity_residual,
)
from kreinlab.errors import InputError, SingularPencil
from kreinlab.extensions import inverse_extension, reconstruct_operator
from kreinlab.triplet import m_operator, random_triplet, validate_triplet

from conftest import dims, make_triplet, seeds, upper_sample


def rel(a, b):
    return nx.fro(a - b) / max(nx.fro(a), nx.fro(b))


def test_context_invariants():
    T = make_triplet(51, 6, 3)
    ctx = char_context(T)
    assert nx.fro(ctx.U.conj().T @ ctx.U - np.eye(3)) <= 1e-10
    D = dissipative_part(ctx)
    expect = T.Pi @ sla.inv(T.Lambda + 1j * np.eye(3)) @ sla.inv(T.Lambda - 1j * np.eye(3)) @ T.Pi.conj().T
    assert rel(D, expect) < 1e-12
    assert np.linalg.eigvalsh(0.5 * (D + D.conj().T))[0] >= -1e-10


def test_dissipative_operator_is_the_inverse_of_l():
    T = make_triplet(52, 5, 2)
    ctx = char_context(T)
    assert rel(inverse_extension(T, dissipative_pair(T)), ctx.T_op) < 1e-13
    L = reconstruct_operator(T, dissipative_pair(T)).matrix
    assert rel(np.linalg.inv(L), ctx.T_op) < 1e-10


def test_cayley_examples():
    T0 = validate_triplet(np.diag([2.0, -3.0]), [[1.0], [1.0]], [[0.0]])
    assert np.allclose(cayley_transform(T0, 0), -np.eye(1), atol=1e-15)
    T = make_triplet(53)
    assert rel(cayley_transform(T, 0), char_context(T).U) < 1e-14


def test_characteristic_function_examples():
    T = make_triplet(54)
    ctx = char_context(T)
    assert np.array_equal(characteristic_function(ctx, T, 0), ctx.U)
    base = make_triplet(55, 4, 2)
    small = validate_triplet(base.A0, 1e-6 * base.Pi, base.Lambda)
    c2 = char_context(small)
    assert nx.fro(characteristic_function(c2, small, 0.4 + 0.5j) - c2.U) < 1e-10


@given(seeds, dims)
def test_theta_identity_and_contractivity(seed, nm):
    T = random_triplet(np.random.default_rng(seed), *nm)
    rng = np.random.default_rng(seed + 1)
    ctx = char_context(T)
    for _ in range(3):
        z = complex(rng.uniform(-6, 6), T.gap * rng.uniform(1e-3, 5))
        th = cayley_transform(T, z)
        assert rel(th, characteristic_function(ctx, T, z)) <= 1e-9
        assert nx.spectral_norm(th) <= 1 + 1e-10
        # independent oracle: (M - i)(M + i)^{-1} by explicit inverse
        M = m_operator(T, z)
        assert rel(th, (M - 1j * np.eye(T.m)) @ sla.inv(M + 1j * np.eye(T.m))) < 1e-10


@given(seeds, dims)
def test_vartheta_identity(seed, nm):
    T = random_triplet(np.random.default_rng(seed), *nm)
    ctx = char_context(T)
    rng = np.random.default_rng(seed + 2)
    for z in (-0.5j * T.gap, upper_sample(rng, T).conjugate()):
        th = characteristic_function(ctx, T, z.conjugate())
        assert vartheta_identity_residual(ctx, T, z) <= 1e-9 * max(nx.fro(ctx.U @ th.conj().T), 1.0)


def test_vartheta_scalar_by_hand():
    T = validate_triplet([[2.0]], [[1.0]], [[0.0]])
    ctx = char_context(T)
    # Lambda = 0: U = -1, T_op = 1/2 + 1/(-i)... = 1/2 - i
    t = 0.5 - 1j
    z = 0.3 - 0.7j
    theta_zbar = -1 + 2j * z.conjugate() * (1 / 1j) * (1 / (1 - z.conjugate() * np.conj(t))) * (1 / 1j)
    zeta = 1 / z
    var = 1 + 2j * (1 / 1j) * (1 / (t - zeta)) * (1 / -1j)
    assert abs(characteristic_function(ctx, T, z.conjugate())[0, 0] - theta_zbar) < 1e-14
    assert abs(vartheta(ctx, T, zeta)[0, 0] - var) < 1e-14
    assert vartheta_identity_residual(ctx, T, z) <= 1e-12


def test_vartheta_guards():
    T = make_triplet(56)
    ctx = char_context(T)
    with pytest.raises(SingularPencil):
        vartheta_identity_residual(ctx, T, -1e-300j)
    with pytest.raises(InputError):
        vartheta_identity_residual(ctx, T, 0.5j)
