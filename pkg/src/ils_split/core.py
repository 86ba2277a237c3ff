"""ILS problem instances and the normal equation ``A^T J A x = A^T J b``.

The signature matrix ``J = diag(I_p, -I_q)`` is never stored; it acts as a
sign flip on the ``A2``/``b2`` block everywhere it appears.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from . import kernels
from .errors import DimensionError, HomogeneousRHSError, NonUniqueSolutionError, NotPositiveDefiniteError

# Above this order the Gram matrices stay implicit (y -> A^T (A y)).
DENSE_THRESHOLD = 8192


def _as_matrix(A):
    if sp.issparse(A):
        return sp.csc_matrix(A, dtype=float)
    return np.atleast_2d(np.asarray(A, dtype=float))


@dataclass(frozen=True)
class PartitionedProblem:
    """An ILS instance ``min (b - A x)^T J (b - A x)`` with ``A = [A1; A2]``.

    `A1` and `A2` may be dense arrays or scipy sparse matrices (kept in CSC
    form).  `meta` carries generator provenance (name, seed, parameters) and
    is written to the header of stored problems.
    """

    A1: object
    A2: object
    b1: np.ndarray
    b2: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A1 = _as_matrix(self.A1)
        A2 = self.A2
        if A2 is None or (not sp.issparse(A2) and np.size(A2) == 0):
            A2 = np.zeros((0, A1.shape[1]))
        A2 = _as_matrix(A2)
        if A2.shape[0] == 0 and A2.shape[1] != A1.shape[1]:
            A2 = np.zeros((0, A1.shape[1]))
        b1 = np.asarray(self.b1, dtype=float).reshape(-1)
        b2 = np.asarray(self.b2, dtype=float).reshape(-1)
        object.__setattr__(self, "A1", A1)
        object.__setattr__(self, "A2", A2)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", b2)
        object.__setattr__(self, "meta", dict(self.meta))

        p, n = A1.shape
        q, n2 = A2.shape
        if n < 1:
            raise DimensionError("A1 must have at least one column")
        if n2 != n:
            raise DimensionError(f"A1 has {n} columns but A2 has {n2}")
        if b1.shape[0] != p:
            raise DimensionError(f"b1 has length {b1.shape[0]}, expected p = {p}")
        if b2.shape[0] != q:
            raise DimensionError(f"b2 has length {b2.shape[0]}, expected q = {q}")
        if p + q < n:
            raise DimensionError(f"m = {p + q} < n = {n}")

    @property
    def p(self):
        return self.A1.shape[0]

    @property
    def q(self):
        return self.A2.shape[0]

    @property
    def m(self):
        return self.p + self.q

    @property
    def n(self):
        return self.A1.shape[1]

    def rhs(self):
        """``A^T J b = A1^T b1 - A2^T b2``."""
        return np.asarray(self.A1.T @ self.b1 - self.A2.T @ self.b2).reshape(-1)

    def normal_matvec(self, x):
        """``A^T J A x`` without forming any Gram matrix."""
        x = np.asarray(x, dtype=float)
        return np.asarray(self.A1.T @ (self.A1 @ x) - self.A2.T @ (self.A2 @ x)).reshape(-1)

    def has_full_column_rank(self):
        """Cholesky-success test on ``A1^T A1``; policy is left to the caller."""
        return kernels.is_spd(kernels.gram(self.A1))


def _gram_operator(A):
    n = A.shape[1]

    def mv(y):
        y = np.asarray(y, dtype=float).reshape(-1)
        return np.asarray(A.T @ (A @ y)).reshape(-1)

    return LinearOperator((n, n), matvec=mv, rmatvec=mv, dtype=float)


@dataclass(frozen=True)
class NormalEquation:
    """``(G1 - G2) x = c`` with ``G1 = A1^T A1``, ``G2 = A2^T A2``, ``c = A^T J b``.

    `G1`/`G2` are dense symmetric arrays on the explicit path and
    ``LinearOperator`` objects on the implicit one.
    """

    G1: object
    G2: object
    c: np.ndarray

    @property
    def n(self):
        return self.c.shape[0]

    @property
    def explicit(self):
        return isinstance(self.G1, np.ndarray) and isinstance(self.G2, np.ndarray)

    def g1(self, x):
        return self.G1 @ x

    def g2(self, x):
        return self.G2 @ x

    @cached_property
    def H(self):
        """Dense ``A^T J A``; forms the Gram matrices on the implicit path."""
        return self.dense_G1 - self.dense_G2

    @property
    def dense_G1(self):
        return self.G1 if isinstance(self.G1, np.ndarray) else kernels.symmetrize(self.G1 @ np.eye(self.n))

    @property
    def dense_G2(self):
        return self.G2 if isinstance(self.G2, np.ndarray) else kernels.symmetrize(self.G2 @ np.eye(self.n))

    def matvec(self, x):
        if self.explicit:
            return self.H @ x
        return self.G1 @ x - self.G2 @ x

    def res(self, x):
        """The squared relative residual ``||c - H x||^2 / ||c||^2``."""
        cc = float(self.c @ self.c)
        if cc == 0.0:
            raise HomogeneousRHSError()
        r = self.c - self.matvec(x)
        return float(r @ r) / cc


def assemble_normal(prob, dense_threshold=DENSE_THRESHOLD):
    """Build the normal equation of `prob`.

    Gram matrices are formed densely (and symmetrized) when
    ``n <= dense_threshold``; otherwise they are returned as implicit
    operators.
    """
    if not isinstance(prob, PartitionedProblem):
        raise TypeError("assemble_normal expects a PartitionedProblem")
    c = prob.rhs()
    if prob.n <= dense_threshold:
        return NormalEquation(kernels.gram(prob.A1), kernels.gram(prob.A2), c)
    return NormalEquation(_gram_operator(prob.A1), _gram_operator(prob.A2), c)


def residual_res(prob, x):
    """RES of `x` for a problem (or an already assembled normal equation).

    RES is the squared ratio ``||A^T J b - A^T J A x||_2^2 / ||A^T J b||_2^2``.

    Raises
    ------
    HomogeneousRHSError
        If ``A^T J b = 0``.
    """
    if isinstance(prob, NormalEquation):
        return prob.res(x)
    c = prob.rhs()
    cc = float(c @ c)
    if cc == 0.0:
        raise HomogeneousRHSError()
    r = c - prob.normal_matvec(x)
    return float(r @ r) / cc


def direct_solve_oracle(ne):
    """Reference solution of ``H x = c`` by a Cholesky factorization of ``H``."""
    try:
        f = kernels.cholesky(ne.H)
    except NotPositiveDefiniteError as exc:
        raise NonUniqueSolutionError(f"non-unique ILS solution: {exc}") from exc
    return kernels.chol_solve(f, ne.c)
