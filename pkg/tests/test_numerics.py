from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from kreinlab import numerics as nx
from kreinlab.errors import NonFiniteEntry, NotHermitian, ShapeMismatch, Singular

from conftest import cgauss


def test_as_matrix_shapes_and_finiteness():
    with pytest.raises(NonFiniteEntry):
        nx.as_matrix([[1.0, math.nan]])
    with pytest.raises(ShapeMismatch):
        nx.as_matrix(np.zeros((2, 2, 2)))
    assert nx.as_matrix([1.0, 2.0]).shape == (2, 1)  # vectors become columns
    assert nx.as_matrix(3.0).shape == (1, 1)


def test_solve_identity_and_diagonal():
    v = np.array([[1.0], [2j], [-3.0]])
    assert np.allclose(nx.solve(np.eye(3), v), v)
    x = nx.solve(np.diag([2.0, 4.0]), np.array([1.0, 1.0]))
    assert np.allclose(x, [0.5, 0.25], atol=0, rtol=1e-15)


def test_solve_singular_below_rcond():
    with pytest.raises(Singular):
        nx.solve(np.diag([1e-16, 1.0]), np.ones(2))


@given(st.integers(0, 2**31), st.integers(1, 10))
def test_solve_residual_contract(seed, n):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, (n, n)) + 3 * np.eye(n)
    B = cgauss(rng, (n, 2))
    X = nx.solve(A, B)
    assert nx.fro(A @ X - B) <= 1e-10 * nx.fro(A) * nx.fro(X)


def test_log_det_examples():
    d = nx.log_det(np.diag([2.0, 3.0]))
    assert d.log_modulus == pytest.approx(math.log(6), rel=1e-15)
    assert d.phase == pytest.approx(1)
    d = nx.log_det(np.eye(4))
    assert d.log_modulus == 0 and d.phase == pytest.approx(1)
    d = nx.log_det(np.diag([1j, 1j]))
    assert abs(d.log_modulus) < 1e-15
    assert abs(d.phase + 1) < 1e-15


def test_log_det_zero_pivot():
    d = nx.log_det(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert d.is_zero and d.phase == 1 and d.value == 0
    assert d.to_json()["log_modulus"] is None


@given(st.integers(0, 2**31), st.integers(1, 9))
def test_log_det_matches_slogdet(seed, n):
    # independent oracle: numpy's slogdet
    rng = np.random.default_rng(seed)
    A = cgauss(rng, (n, n))
    d = nx.log_det(A)
    sign, logabs = np.linalg.slogdet(A)
    assert abs(abs(d.phase) - 1) <= 1e-12
    assert d.log_modulus == pytest.approx(logabs, abs=1e-10)
    assert abs(d.phase - sign) <= 1e-10
    assert abs(d.value - np.linalg.det(A)) <= 1e-10 * abs(np.linalg.det(A))


def test_log_det_large_modulus_does_not_overflow():
    d = nx.log_det(np.diag([1e200, 1e200, -1e200]))
    assert d.log_modulus == pytest.approx(600 * math.log(10))
    assert d.real_proxy() < 0 and math.isfinite(d.real_proxy())


def test_eig_hermitian_examples():
    w, V = nx.eig_hermitian(np.diag([3.0, 1.0]))
    assert np.allclose(w, [1, 3])
    assert np.allclose(np.abs(V), [[0, 1], [1, 0]])
    w, _ = nx.eig_hermitian(np.array([[0, 1j], [-1j, 0]]))
    assert np.allclose(w, [-1, 1])
    with pytest.raises(NotHermitian):
        nx.eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(st.integers(0, 2**31), st.integers(1, 10))
def test_eig_hermitian_contract(seed, n):
    rng = np.random.default_rng(seed)
    H = cgauss(rng, (n, n))
    H = H + H.conj().T
    w, V = nx.eig_hermitian(H)
    assert np.all(np.diff(w) >= 0)
    assert nx.fro(H @ V - V * w) <= 1e-10 * nx.fro(H)
    assert nx.fro(V.conj().T @ V - np.eye(n)) <= 1e-10


def test_eig_general_examples():
    assert np.allclose(nx.eig_general(np.diag([1 + 1j, 2])), [1 + 1j, 2])
    assert np.allclose(nx.eig_general(np.array([[0, 1], [0, 0]])), [0, 0])
    assert np.allclose(nx.eig_general(np.eye(2)), [1, 1])


@given(st.integers(0, 2**31), st.integers(1, 10))
def test_eig_general_contract(seed, n):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, (n, n))
    for lam in nx.eig_general(A):
        assert nx.smallest_singular_value(A - lam * np.eye(n)) <= 1e-8 * nx.fro(A)


def test_norm_helpers():
    assert nx.spectral_norm(np.eye(2)) == pytest.approx(1)
    assert nx.smallest_singular_value(np.diag([2.0, 0.5])) == pytest.approx(0.5)
    assert nx.is_hermitian(np.diag([1.0, 2.0]), 1e-12)
    assert not nx.is_hermitian(np.array([[0, 1.0], [0, 0]]), 1e-12)


def test_nullspace_against_scipy():
    A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    K = nx.nullspace(A, 1e-10)
    ref = scipy.linalg.null_space(A)
    assert K.shape == ref.shape
    # same subspace: projectors agree
    assert nx.fro(K @ K.conj().T - ref @ ref.conj().T) < 1e-12


def test_matrix_json_round_trip(rng):
    A = cgauss(rng, (3, 2))
    assert np.array_equal(nx.matrix_from_json(nx.matrix_to_json(A)), A)
    assert np.array_equal(nx.matrix_from_json([[1, 2]]), np.array([[1, 2]], dtype=complex))
    for bad in ([], [[1, 2], [3]], [[[1, 2, 3]]], "x", [[True]]):
        with pytest.raises(ShapeMismatch):
            nx.matrix_from_json(bad)
