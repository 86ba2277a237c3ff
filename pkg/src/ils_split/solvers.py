"""Stationary splitting iterations for the ILS normal equation.

Single splittings ``H = M - N`` (SP, GSP), the two half-step ADI scheme, and
the two-step double splitting ``H = P - R - S`` (DS) with

    P = alpha*I + A1^T A1,   R = A2^T A2,   S = alpha*I.

All schemes share one driver, :func:`run`, which stops once the squared
relative residual drops below `tol` or after `k_max` full iterations.
"""

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator

from . import kernels
from .core import DENSE_THRESHOLD
from .errors import DimensionError, DivergenceError, ParameterError

log = logging.getLogger(__name__)

TOL = 1e-8
K_MAX = 10000


class SchemeKind(str, enum.Enum):
    SP = "SP"
    GSP = "GSP"
    ADI = "ADI"
    DS = "DS"


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"


# Parameter choices used in the reference experiments.
GSP_ALPHA = 1e-6
ADI_ALPHA = 1e-6
ADI_BETA = 1e15
DS_ALPHA = {"ex1": 1.0, "ex2": 1e-4}


def default_parameters(kind, generator=None):
    """Default ``(alpha, beta)`` for `kind`; DS depends on the instance family."""
    kind = SchemeKind(kind)
    if kind is SchemeKind.SP:
        return None, None
    if kind is SchemeKind.GSP:
        return GSP_ALPHA, None
    if kind is SchemeKind.ADI:
        return ADI_ALPHA, ADI_BETA
    return DS_ALPHA.get(generator, DS_ALPHA["ex1"]), None


@dataclass(frozen=True, eq=False)
class SplittingScheme:
    """Factored operators of one iteration method.

    `factors` holds the Cholesky factor of ``M`` (SP/GSP), of ``M1`` and
    ``beta*I + G2`` (ADI) or of ``P`` (DS).  For DS on the dense path,
    `precomputed` carries ``R1 = P^{-1} G2`` (dense), ``S1 = alpha*P^{-1}``
    (an operator; never inverted explicitly) and ``B1 = P^{-1} c``.
    """

    kind: SchemeKind
    ne: object
    alpha: float = None
    beta: float = None
    factors: tuple = ()
    precomputed: dict = None
    setup_seconds: float = 0.0

    def matrices(self):
        """Dense splitting matrices, keyed by name, for consistency checks."""
        G1, G2 = self.ne.dense_G1, self.ne.dense_G2
        eye = np.eye(self.ne.n)
        a, b = self.alpha, self.beta
        if self.kind is SchemeKind.SP:
            return {"M": G1, "N": G2}
        if self.kind is SchemeKind.GSP:
            return {"M": a * eye + G1, "N": a * eye + G2}
        if self.kind is SchemeKind.ADI:
            return {
                "M1": a * eye + G1,
                "N1": a * eye + G2,
                "M2": -(b * eye + G2),
                "N2": -(b * eye + G1),
            }
        return {"P": a * eye + G1, "R": G2, "S": a * eye}


@dataclass
class SolveReport:
    x: np.ndarray
    iterations: int
    final_res: float
    elapsed: float
    terminated: Termination
    setup_elapsed: float = 0.0
    res_history: list = field(default=None, repr=False)

    @property
    def converged(self):
        return self.terminated is Termination.CONVERGED


def _check_alpha(alpha, kind):
    if alpha is None or not np.isfinite(alpha) or alpha <= 0:
        raise ParameterError(f"{kind.value} needs alpha > 0, got {alpha}")


def _shifted(G, shift):
    n = G.shape[0]
    if not isinstance(G, np.ndarray):
        log.warning("forming a dense %dx%d matrix to factor an implicit Gram operator", n, n)
        G = kernels.symmetrize(G @ np.eye(n))
    out = np.array(G, dtype=float, copy=True)
    out[np.diag_indices(n)] += shift
    return out


def build_scheme(ne, kind, alpha=None, beta=None, dense_threshold=DENSE_THRESHOLD):
    """Factor the operators of one splitting method.

    `alpha`/`beta` default to :func:`default_parameters` when omitted.

    Raises
    ------
    ParameterError
        Non-positive `alpha`, or ``beta <= alpha`` for ADI.
    NotPositiveDefiniteError
        Propagated from the factorization (e.g. SP with a singular ``G1``).
    """
    kind = SchemeKind(kind)
    d_alpha, d_beta = default_parameters(kind)
    alpha = d_alpha if alpha is None else float(alpha)
    beta = d_beta if beta is None else float(beta)

    t0 = time.perf_counter()
    precomputed = None
    if kind is SchemeKind.SP:
        alpha = beta = None
        factors = (kernels.cholesky(_shifted(ne.G1, 0.0)),)
    elif kind is SchemeKind.GSP:
        _check_alpha(alpha, kind)
        beta = None
        factors = (kernels.cholesky(_shifted(ne.G1, alpha)),)
    elif kind is SchemeKind.ADI:
        _check_alpha(alpha, kind)
        if beta is None or not np.isfinite(beta) or not beta > alpha:
            raise ParameterError(f"ADI needs beta > alpha > 0, got alpha={alpha}, beta={beta}")
        factors = (kernels.cholesky(_shifted(ne.G1, alpha)), kernels.cholesky(_shifted(ne.G2, beta)))
    else:
        _check_alpha(alpha, kind)
        beta = None
        fP = kernels.cholesky(_shifted(ne.G1, alpha))
        factors = (fP,)
        if ne.explicit and ne.n <= dense_threshold:
            n = ne.n
            S1 = LinearOperator((n, n), matvec=lambda v, f=fP, a=alpha: a * kernels.chol_solve(f, v), dtype=float)
            precomputed = {
                "R1": kernels.chol_solve(fP, ne.G2),
                "S1": S1,
                "B1": kernels.chol_solve(fP, ne.c),
            }
    setup = time.perf_counter() - t0
    return SplittingScheme(kind, ne, alpha, beta, factors, precomputed, setup)


def _check_vec(s, v):
    if v.shape != (s.ne.n,):
        raise DimensionError(f"expected a vector of length {s.ne.n}, got shape {v.shape}")


def step_single(s, x, c):
    """One SP/GSP step ``x' = M^{-1}(N x + c)``."""
    if s.kind not in (SchemeKind.SP, SchemeKind.GSP):
        raise ParameterError(f"step_single does not apply to {s.kind.value}")
    _check_vec(s, x)
    rhs = s.ne.g2(x) + c
    if s.kind is SchemeKind.GSP:
        rhs = rhs + s.alpha * x
    return kernels.chol_solve(s.factors[0], rhs)


def step_adi(s, x, c):
    """One full ADI sweep (both half-steps).

    The second half-step matrix ``M2 = -(beta*I + G2)`` is negative definite;
    it is applied through the factor of ``beta*I + G2`` with the sign folded
    into the right-hand side.
    """
    if s.kind is not SchemeKind.ADI:
        raise ParameterError(f"step_adi does not apply to {s.kind.value}")
    _check_vec(s, x)
    f1, f2 = s.factors
    half = kernels.chol_solve(f1, s.alpha * x + s.ne.g2(x) + c)
    return kernels.chol_solve(f2, s.beta * half + s.ne.g1(half) - c)


def step_ds(s, x_k, x_km1, c):
    """One DS step ``x_{k+1} = P^{-1}(R x_k + S x_{k-1} + c)``."""
    if s.kind is not SchemeKind.DS:
        raise ParameterError(f"step_ds does not apply to {s.kind.value}")
    _check_vec(s, x_k)
    _check_vec(s, x_km1)
    pre = s.precomputed
    if pre is not None and (c is s.ne.c or np.array_equal(c, s.ne.c)):
        return pre["R1"] @ x_k + pre["S1"] @ x_km1 + pre["B1"]
    return kernels.chol_solve(s.factors[0], s.ne.g2(x_k) + s.alpha * x_km1 + c)


def run(s, ne=None, x0=None, x1=None, tol=TOL, k_max=K_MAX, history=False):
    """Iterate `s` from zero (or given) initial vectors until RES < `tol`.

    DS uses two starting vectors; `x1` defaults to `x0`.  One ADI iteration is
    one sweep over both half-steps.  Only the loop is timed; factorization
    time is carried over from the scheme as ``setup_elapsed``.

    Raises
    ------
    DivergenceError
        When an iterate becomes non-finite.
    """
    ne = s.ne if ne is None else ne
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if k_max < 1:
        raise ParameterError(f"k_max must be at least 1, got {k_max}")
    n = ne.n
    c = ne.c
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x1 is not None and s.kind is not SchemeKind.DS:
        raise ParameterError("a second initial vector only applies to DS")
    x_prev = x
    if s.kind is SchemeKind.DS:
        x = x_prev.copy() if x1 is None else np.array(x1, dtype=float)

    trace = [] if history else None
    t0 = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        res, k, x = _loop(s, ne, x, x_prev, c, tol, k_max, trace)
    elapsed = time.perf_counter() - t0
    status = Termination.CONVERGED if res < tol else Termination.MAX_ITER
    return SolveReport(x, k, res, elapsed, status, s.setup_seconds, trace)


def _loop(s, ne, x, x_prev, c, tol, k_max, trace):
    res = np.inf
    k = 0
    while k < k_max:
        k += 1
        if s.kind is SchemeKind.DS:
            x, x_prev = step_ds(s, x, x_prev, c), x
        elif s.kind is SchemeKind.ADI:
            x = step_adi(s, x, c)
        else:
            x = step_single(s, x, c)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(k)
        res = ne.res(x)
        if trace is not None:
            trace.append(res)
        if res < tol:
            break
    return res, k, x
