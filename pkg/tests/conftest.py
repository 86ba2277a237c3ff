import numpy as np
import pytest

from ils_split import PartitionedProblem, assemble_normal


def random_instance(n, seed, q=None, margin=0.5):
    """Seeded random ILS instance with ``A^T J A`` SPD.

    ``A1`` is Gaussian with ``p = 3n + 5`` rows; ``A2`` is Gaussian rescaled so
    that ``lambda_max(A2^T A2) = margin * lambda_min(A1^T A1)``.
    """
    rng = np.random.default_rng(seed)
    p = 3 * n + 5
    if q is None:
        q = int(rng.integers(1, n + 1))
    A1 = rng.standard_normal((p, n))
    A2 = rng.standard_normal((q, n))
    lmin = np.linalg.eigvalsh(A1.T @ A1)[0]
    A2 *= np.sqrt(margin * lmin) / np.linalg.norm(A2, 2)
    b1 = rng.standard_normal(p)
    b2 = rng.standard_normal(q)
    return PartitionedProblem(A1, A2, b1, b2, {"generator": "random", "seed": seed})


def random_instances(count, n_range=(5, 30), seed0=0):
    rng = np.random.default_rng(10_000 + seed0)
    return [random_instance(int(rng.integers(n_range[0], n_range[1] + 1)), seed0 + i) for i in range(count)]


@pytest.fixture
def running_problem():
    """A1 = 2I, A2 = [1 0], b1 = [2 2], b2 = [1]: H = diag(3, 4), c = [3, 4], x* = [1, 1]."""
    return PartitionedProblem(np.array([[2.0, 0.0], [0.0, 2.0]]), np.array([[1.0, 0.0]]), [2.0, 2.0], [1.0])


@pytest.fixture
def running(running_problem):
    return assemble_normal(running_problem)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
