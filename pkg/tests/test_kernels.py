import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from ils_split import kernels
from ils_split.errors import CapacityError, DimensionError, NotPositiveDefiniteError


def test_cholesky_identity():
    f = kernels.cholesky(np.eye(4))
    np.testing.assert_array_equal(f.L, np.eye(4))


def test_cholesky_2x2_by_hand():
    f = kernels.cholesky(np.array([[4.0, 2.0], [2.0, 3.0]]))
    np.testing.assert_allclose(f.L, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], rtol=1e-15)
    np.testing.assert_allclose(f.L @ f.L.T, [[4.0, 2.0], [2.0, 3.0]], rtol=1e-15)


def test_cholesky_indefinite_reports_pivot():
    with pytest.raises(NotPositiveDefiniteError, match="pivot 1") as info:
        kernels.cholesky(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert info.value.pivot == 1


def test_cholesky_second_pivot():
    # [[1, 1], [1, 1]] is singular: second pivot is 0
    with pytest.raises(NotPositiveDefiniteError) as info:
        kernels.cholesky(np.ones((2, 2)))
    assert info.value.pivot == 2


def test_cholesky_tiny_relative_pivot_rejected():
    M = np.diag([1.0, 1e-14])
    with pytest.raises(NotPositiveDefiniteError) as info:
        kernels.cholesky(M)
    assert info.value.pivot == 2
    assert kernels.is_spd(np.diag([1.0, 1e-12]))


def test_cholesky_rejects_non_square():
    with pytest.raises(DimensionError):
        kernels.cholesky(np.ones((2, 3)))


@pytest.mark.parametrize(
    "M, v, expected",
    [
        (np.eye(3), [1.0, -2.0, 5.0], [1.0, -2.0, 5.0]),
        (np.diag([5.0, 5.0]), [3.0, 4.0], [0.6, 0.8]),
        (np.array([[4.0, 2.0], [2.0, 3.0]]), [6.0, 5.0], [1.0, 1.0]),
    ],
)
def test_chol_solve_examples(M, v, expected):
    np.testing.assert_allclose(kernels.chol_solve(kernels.cholesky(M), v), expected, rtol=1e-14)


def test_chol_solve_dimension_mismatch():
    with pytest.raises(DimensionError):
        kernels.chol_solve(kernels.cholesky(np.eye(3)), np.ones(2))


def test_chol_solve_matrix_rhs():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((6, 6))
    M = X @ X.T + 6 * np.eye(6)
    B = rng.standard_normal((6, 4))
    np.testing.assert_allclose(M @ kernels.chol_solve(kernels.cholesky(M), B), B, atol=1e-12)


@pytest.mark.parametrize("M, expected", [(np.eye(3), True), (-np.eye(3), False), (np.diag([3.0, 4.0]), True)])
def test_is_spd_examples(M, expected):
    assert kernels.is_spd(M) is expected


def _random_spd(rng, n):
    X = rng.standard_normal((n, n))
    return X @ X.T + 1e-2 * n * np.eye(n)


def test_factor_reconstruction_200_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 65))
        M = _random_spd(rng, n)
        f = kernels.cholesky(M)
        assert np.all(np.diag(f.L) > 0)
        assert np.allclose(f.L, np.tril(f.L))
        assert np.linalg.norm(f.L @ f.L.T - M) <= n * 1e-13 * np.linalg.norm(M)


def test_is_spd_matches_smallest_eigenvalue():
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 20))
        X = rng.standard_normal((n, n))
        M = X + X.T + rng.normal(0.0, 3.0) * np.eye(n)
        lam = np.min(np.real(kernels.dense_eigs(M)))
        if abs(lam) < 1e-10 * np.linalg.norm(M):
            continue
        assert kernels.is_spd(M) == (lam > 0)
        checked += 1
    assert checked > 150


def test_solve_after_matvec_is_identity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        M = _random_spd(rng, n)
        f = kernels.cholesky(M)
        v = rng.standard_normal(n)
        np.testing.assert_allclose(kernels.chol_solve(f, M @ v), v, rtol=1e-10, atol=1e-10 * np.linalg.norm(v))


@pytest.mark.parametrize(
    "M, expected",
    [
        (np.diag([0.5, -0.8]), [-0.8, 0.5]),
        (np.zeros((2, 2)), [0.0, 0.0]),
    ],
)
def test_dense_eigs_examples(M, expected):
    w = kernels.dense_eigs(M)
    np.testing.assert_allclose(np.sort(w.real), expected, atol=1e-15)
    np.testing.assert_allclose(w.imag, 0.0)


def test_dense_eigs_companion_pair():
    p, q = 0.2, 0.5
    w = kernels.dense_eigs(np.array([[0.0, 1.0], [-q, p]]))
    # quadratic formula: lam = (p +- i sqrt(4q - p^2)) / 2
    expected = (p + 1j * np.sqrt(4 * q - p * p)) / 2
    assert np.all(np.abs(w.imag) > 0)
    np.testing.assert_allclose(np.abs(w), np.sqrt(0.5), rtol=1e-12)
    np.testing.assert_allclose(sorted(w, key=lambda z: z.imag), [expected.conjugate(), expected], rtol=1e-12)


def test_dense_eigs_cap():
    with pytest.raises(CapacityError):
        kernels.dense_eigs(np.eye(5), cap=4)


def test_gram_sparse_dense_agree_and_symmetric():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((30, 7))
    G = kernels.gram(A)
    np.testing.assert_array_equal(G, G.T)
    np.testing.assert_allclose(kernels.gram(sp.csc_matrix(A)), G, rtol=1e-13)
    np.testing.assert_array_equal(kernels.gram(np.zeros((0, 3))), np.zeros((3, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1), st.floats(1e-3, 1e3))
def test_cholesky_scale_invariance(n, seed, scale):
    rng = np.random.default_rng(seed)
    M = _random_spd(rng, n)
    L1 = kernels.cholesky(M).L
    L2 = kernels.cholesky(scale * M).L
    np.testing.assert_allclose(L2, np.sqrt(scale) * L1, rtol=1e-10, atol=1e-12 * np.abs(L2).max())
