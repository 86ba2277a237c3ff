"""Small dense/sparse linear-algebra layer.

Gram products, Cholesky factorization with an explicit pivot tolerance,
triangular solves, an SPD test and a general dense eigensolver.  The heavy
lifting is delegated to LAPACK through scipy; this module owns the contracts
(tolerances, error reporting, symmetry) that the solvers rely on.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack

from .errors import CapacityError, DimensionError, NotPositiveDefiniteError

PIVOT_TOL = 1e-13
EIG_CAP = 2000


def symmetrize(X):
    return 0.5 * (X + X.T)


def gram(A):
    """Return the dense symmetrized Gram matrix ``A^T A``.

    ``A`` may be a numpy array or any scipy sparse matrix.  An ``A`` with no
    rows yields the zero matrix.
    """
    if sp.issparse(A):
        G = (A.T @ A).toarray()
    else:
        A = np.asarray(A, dtype=float)
        G = A.T @ A
    return symmetrize(np.asarray(G, dtype=float))


@dataclass(frozen=True)
class CholFactor:
    """Lower Cholesky factor ``L`` with ``L L^T = M``."""

    L: np.ndarray

    @property
    def n(self):
        return self.L.shape[0]

    def solve(self, v):
        return chol_solve(self, v)


def cholesky(M, pivot_tol=PIVOT_TOL):
    """Factor a symmetric matrix as ``L L^T``.

    Only the lower triangle of `M` is read.  A pivot ``L[k, k]**2`` that is
    not larger than ``pivot_tol * max(diag(M))`` is treated as a failure.

    Raises
    ------
    NotPositiveDefiniteError
        With the 1-based index of the first failing pivot.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"cholesky needs a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n == 0:
        return CholFactor(np.zeros((0, 0)))
    max_diag = float(np.max(np.diag(M)))
    if not max_diag > 0.0:
        raise NotPositiveDefiniteError(1, max_diag)
    L, info = lapack.dpotrf(M, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(int(info))
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    pivots = np.diag(L) ** 2
    bad = np.flatnonzero(pivots <= pivot_tol * max_diag)
    if bad.size:
        k = int(bad[0])
        raise NotPositiveDefiniteError(k + 1, float(pivots[k]))
    return CholFactor(L)


def chol_solve(f, v):
    """Solve ``M x = v`` given ``f = cholesky(M)``; `v` may be a vector or a matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != f.n:
        raise DimensionError(f"factor has order {f.n}, right-hand side has {v.shape[0]} rows")
    if f.n == 0:
        return v.copy()
    x, info = lapack.dpotrs(f.L, v, lower=1)
    if info != 0:
        raise ValueError(f"dpotrs: illegal argument {-info}")
    return x


def is_spd(M, pivot_tol=PIVOT_TOL):
    try:
        cholesky(M, pivot_tol=pivot_tol)
    except NotPositiveDefiniteError:
        return False
    return True


def dense_eigs(M, cap=EIG_CAP, vectors=False):
    """Eigenvalues (and optionally right eigenvectors) of a general real matrix.

    Uses LAPACK ``geev`` (balancing, Hessenberg reduction, shifted QR).

    Raises
    ------
    CapacityError
        If the order of `M` exceeds `cap`.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"dense_eigs needs a square matrix, got shape {M.shape}")
    if M.shape[0] > cap:
        raise CapacityError(f"matrix order {M.shape[0]} exceeds eigensolver cap {cap}")
    if vectors:
        w, V = np.linalg.eig(M)
        return w.astype(complex), V.astype(complex)
    return np.linalg.eigvals(M).astype(complex)
