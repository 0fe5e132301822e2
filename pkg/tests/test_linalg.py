import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubwitness.linalg import (
    DimensionError,
    NotHermitianError,
    Tolerance,
    adjoint,
    as_matrix,
    hermitian_eigenvalues,
    identity,
    is_scaled_hadamard,
    is_unitary,
    matmul,
    matrix_from_json,
    matrix_to_json,
)

from conftest import random_complex, random_unitaries


def triple_loop(a, b):
    n = len(a)
    out = [[0j] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = sum(a[i][k] * b[k][j] for k in range(n))
    return np.array(out)


def test_matmul_identity():
    assert np.array_equal(matmul(identity(3), identity(3)), identity(3))


def test_matmul_imaginary_unit():
    d = np.diag([1j, 1j])
    assert np.array_equal(matmul(d, d), np.diag([-1.0 + 0j, -1.0 + 0j]))


def test_matmul_against_triple_loop(rng):
    a, b = random_complex(rng, 4), random_complex(rng, 4)
    assert np.max(np.abs(matmul(a, b) - triple_loop(a.tolist(), b.tolist()))) <= 1e-12


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionError):
        matmul(identity(2), identity(3))


def test_adjoint_examples(rng):
    assert np.array_equal(adjoint(identity(4)), identity(4))
    a = np.array([[0, 1], [1j, 0]])
    assert np.array_equal(adjoint(a), np.array([[0, -1j], [1, 0]]))
    z = random_complex(rng, 5)
    assert np.array_equal(adjoint(adjoint(z)), z)


def test_adjoint_returns_fresh_array():
    a = identity(2)
    b = adjoint(a)
    b[0, 0] = 5
    assert a[0, 0] == 1


def test_is_unitary_examples(fourier6):
    assert is_unitary(identity(6))
    assert not is_unitary(2 * identity(2))
    assert is_unitary(fourier6)


def test_fourier_columns_orthonormal_directly(fourier6):
    # column inner products by hand, as an independent check of the predicate's verdict
    for j in range(6):
        for k in range(6):
            ip = sum(fourier6[r, j].conjugate() * fourier6[r, k] for r in range(6))
            assert abs(ip - (j == k)) < 1e-12


def test_is_scaled_hadamard_examples(fourier6):
    assert is_scaled_hadamard(fourier6)
    assert not is_scaled_hadamard(identity(6))
    assert is_scaled_hadamard(np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        Tolerance(unitary_tol=0.0)


def test_eigenvalue_examples():
    assert np.allclose(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3], atol=1e-14)
    assert np.allclose(hermitian_eigenvalues(np.array([[2, 1j], [-1j, 2]])), [1, 3], atol=1e-14)
    for m in (1, 4, 7):
        ev = hermitian_eigenvalues(np.ones((m, m)))
        assert np.allclose(ev, [0] * (m - 1) + [m], atol=1e-12)


def test_eigenvalues_reject_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("method", ["ql", "jacobi"])
@pytest.mark.parametrize("n", [1, 2, 3, 6, 13, 30])
def test_eigenvalues_match_lapack(method, n, rng):
    for complex_input in (False, True):
        x = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if complex_input else 0)
        a = x + x.conj().T
        ev = hermitian_eigenvalues(a, method=method)
        assert np.all(np.diff(ev) >= 0)
        assert np.max(np.abs(ev - np.linalg.eigvalsh(a))) <= 1e-8 * max(1.0, np.linalg.norm(a))


def test_eigenvalues_degenerate_and_zero():
    assert np.array_equal(hermitian_eigenvalues(np.zeros((4, 4))), np.zeros(4))
    ev = hermitian_eigenvalues(np.diag([2.0, 2.0, 2.0, -1.0]))
    assert np.allclose(ev, [-1, 2, 2, 2])


def test_eigenvalues_are_deterministic(rng):
    x = rng.standard_normal((9, 9))
    a = x + x.T
    assert np.array_equal(hermitian_eigenvalues(a), hermitian_eigenvalues(a))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_eigenvalues_sum_to_trace(seed, n):
    g = np.random.default_rng(seed)
    x = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
    a = x + x.conj().T
    tr = np.trace(a).real
    assert abs(np.sum(hermitian_eigenvalues(a)) - tr) <= 1e-8 * max(1.0, abs(tr), np.linalg.norm(a))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_adjoint_reverses_products(seed, d):
    g = np.random.default_rng(seed)
    a, b = random_complex(g, d), random_complex(g, d)
    assert np.max(np.abs(adjoint(matmul(a, b)) - matmul(adjoint(b), adjoint(a)))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_unitary_group_closure(seed, d):
    u, v = random_unitaries(d, 2, seed)
    assert is_unitary(matmul(u, v))


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_scaled_hadamard_closed_under_adjoint(d):
    from mubwitness.catalog6 import fourier

    f = fourier(d) * np.exp(1j * np.arange(d))[None, :]
    assert is_scaled_hadamard(f)
    assert is_scaled_hadamard(adjoint(f))


def test_json_roundtrip(rng):
    z = random_complex(rng, 3)
    doc = json.loads(json.dumps(matrix_to_json(z)))
    assert doc["dim"] == 3 and len(doc["entries"]) == 9
    assert np.array_equal(matrix_from_json(doc), z)


def test_json_rejects_bad_input():
    with pytest.raises(ValueError):
        matrix_from_json({"dim": 2, "entries": [[1, 0]] * 3})
    with pytest.raises(ValueError):
        matrix_from_json('{"dim": 1, "entries": [[NaN, 0]]}')
    with pytest.raises(ValueError):
        matrix_from_json({"dim": 1, "entries": [[1, 0, 0]]})


def test_as_matrix_rejects_non_square_and_nonfinite():
    with pytest.raises(DimensionError):
        as_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_matrix([[np.inf]])
