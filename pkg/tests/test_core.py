import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_instance, random_instances
from ils_split import PartitionedProblem, assemble_normal, direct_solve_oracle, residual_res
from ils_split.core import NormalEquation
from ils_split.errors import DimensionError, HomogeneousRHSError, NonUniqueSolutionError
from ils_split.problems import Example2Config, gen_example2


def _brute_gram(A):
    A = np.asarray(A)
    n = A.shape[1]
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = sum(A[k, i] * A[k, j] for k in range(A.shape[0]))
    return G


def test_assemble_running_example(running_problem, running):
    np.testing.assert_array_equal(running.G1, np.diag([4.0, 4.0]))
    np.testing.assert_array_equal(running.G2, [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_array_equal(running.c, [3.0, 4.0])
    np.testing.assert_array_equal(running.G1, _brute_gram(running_problem.A1))
    np.testing.assert_array_equal(running.G2, _brute_gram(running_problem.A2))
    np.testing.assert_array_equal(running.H, np.diag([3.0, 4.0]))


def test_q_zero_reduces_to_least_squares():
    rng = np.random.default_rng(0)
    A1 = rng.standard_normal((9, 4))
    b1 = rng.standard_normal(9)
    prob = PartitionedProblem(A1, np.zeros((0, 4)), b1, np.zeros(0))
    assert prob.q == 0 and prob.m == 9
    ne = assemble_normal(prob)
    np.testing.assert_array_equal(ne.G2, np.zeros((4, 4)))
    np.testing.assert_allclose(ne.c, A1.T @ b1, rtol=1e-14)
    x = direct_solve_oracle(ne)
    np.testing.assert_allclose(x, np.linalg.lstsq(A1, b1, rcond=None)[0], rtol=1e-10)


def test_homogeneous_rhs_solution_is_zero(running_problem):
    prob = PartitionedProblem(running_problem.A1, running_problem.A2, [0.0, 0.0], [0.0])
    ne = assemble_normal(prob)
    np.testing.assert_array_equal(ne.c, 0.0)
    np.testing.assert_array_equal(direct_solve_oracle(ne), 0.0)
    with pytest.raises(HomogeneousRHSError, match="RES undefined"):
        residual_res(prob, np.zeros(2))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        PartitionedProblem(np.ones((3, 2)), np.ones((1, 3)), np.ones(3), np.ones(1))
    with pytest.raises(DimensionError):
        PartitionedProblem(np.ones((3, 2)), np.ones((1, 2)), np.ones(2), np.ones(1))
    with pytest.raises(DimensionError):
        PartitionedProblem(np.ones((3, 2)), np.ones((1, 2)), np.ones(3), np.ones(2))
    with pytest.raises(DimensionError):
        PartitionedProblem(np.ones((1, 3)), np.ones((1, 3)), np.ones(1), np.ones(1))


def test_residual_res_examples(running_problem, running):
    assert residual_res(running_problem, np.zeros(2)) == 1.0
    assert residual_res(running_problem, np.ones(2)) == 0.0
    # ||c - H [1, 0]||^2 / ||c||^2 = ||[0, 4]||^2 / 25
    assert residual_res(running_problem, np.array([1.0, 0.0])) == pytest.approx(0.64, rel=1e-15)
    assert residual_res(running, np.array([1.0, 0.0])) == pytest.approx(0.64, rel=1e-15)


def test_direct_solve_examples(running):
    np.testing.assert_allclose(direct_solve_oracle(running), [1.0, 1.0], rtol=1e-15)
    c = np.array([0.3, -2.0, 7.5])
    ne = NormalEquation(np.eye(3), np.zeros((3, 3)), c)
    np.testing.assert_array_equal(direct_solve_oracle(ne), c)


def test_direct_solve_example2_epsilon_zero():
    prob, _ = gen_example2(Example2Config(n=16, epsilon=0.0, seed=3))
    x = direct_solve_oracle(assemble_normal(prob))
    np.testing.assert_allclose(x, np.ones(16), rtol=1e-9)


def test_direct_solve_non_unique():
    ne = NormalEquation(np.eye(2), 2 * np.eye(2), np.ones(2))
    with pytest.raises(NonUniqueSolutionError, match="non-unique ILS solution"):
        direct_solve_oracle(ne)


def test_direct_solve_residual_bound():
    for prob in random_instances(100, (2, 30)):
        ne = assemble_normal(prob)
        x = direct_solve_oracle(ne)
        r = np.linalg.norm(ne.H @ x - ne.c)
        assert r <= 1e-10 * (np.linalg.norm(ne.H) * np.linalg.norm(x) + np.linalg.norm(ne.c))
        assert r / np.linalg.norm(ne.c) <= 1e-10


def test_sign_structure_matches_explicit_J():
    for seed in range(20):
        prob = random_instance(8, seed)
        A = np.vstack([prob.A1, prob.A2])
        J = np.diag(np.r_[np.ones(prob.p), -np.ones(prob.q)])
        b = np.r_[prob.b1, prob.b2]
        ne = assemble_normal(prob)
        AJA = A.T @ J @ A
        np.testing.assert_allclose(ne.H, AJA, rtol=1e-14, atol=1e-14 * np.abs(AJA).max())
        np.testing.assert_allclose(ne.c, A.T @ J @ b, rtol=1e-14, atol=1e-14 * np.abs(A.T @ J @ b).max())


def test_res_at_direct_solution_is_tiny():
    for prob in random_instances(30, (2, 20), seed0=500):
        ne = assemble_normal(prob)
        if np.linalg.cond(ne.H) > 1e4:
            continue
        assert residual_res(prob, direct_solve_oracle(ne)) <= 1e-20


def test_implicit_path_matches_dense():
    prob = random_instance(12, 3)
    dense = assemble_normal(prob)
    implicit = assemble_normal(prob, dense_threshold=4)
    assert dense.explicit and not implicit.explicit
    x = np.random.default_rng(0).standard_normal(12)
    np.testing.assert_allclose(implicit.matvec(x), dense.H @ x, rtol=1e-12)
    np.testing.assert_allclose(direct_solve_oracle(implicit), direct_solve_oracle(dense), rtol=1e-10)


def test_sparse_blocks_accepted():
    prob = random_instance(6, 1)
    sprob = PartitionedProblem(sp.csc_matrix(prob.A1), sp.csc_matrix(prob.A2), prob.b1, prob.b2)
    np.testing.assert_allclose(assemble_normal(sprob).H, assemble_normal(prob).H, rtol=1e-13)


def test_full_column_rank_check():
    assert random_instance(5, 0).has_full_column_rank()
    A1 = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    assert not PartitionedProblem(A1, np.zeros((0, 2)), np.ones(3), []).has_full_column_rank()
