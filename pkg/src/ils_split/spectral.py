"""Eigen-analysis of the DS iteration matrix.

    W = [[P^{-1} R, P^{-1} S],
         [I,        0       ]]

The spectral radius comes from a general dense eigensolve, so the scalar
quadratic ``a*lam**2 - a2*lam - alpha = 0`` satisfied by every eigenpair is
an independent cross-check rather than the route used to compute rho.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import CapacityError, ParameterError
from .solvers import SchemeKind, build_scheme

# W has order 2n, so eigen-analysis is limited to n <= EIG_CAP // 2.
N_CAP = kernels.EIG_CAP // 2


@dataclass
class SpectralReport:
    n: int
    alpha: float
    rho: float
    eigen_quadratic_max_residual: float
    unit_disk_all: bool
    lambda_one_gap: float
    shen_ok: bool
    companion_max_defect: float
    min_a1_minus_a2: float
    ell2_zero_count: int

    def to_dict(self):
        return {k: (v.item() if isinstance(v, np.generic) else v) for k, v in asdict(self).items()}


def _check(ne, alpha, cap):
    if alpha is None or not np.isfinite(alpha) or alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if ne.n > cap:
        raise CapacityError(f"n = {ne.n} exceeds the spectral cap {cap} (W has order 2n)")


def build_W(ne, alpha, cap=N_CAP):
    """Explicit dense 2n x 2n DS iteration matrix."""
    _check(ne, alpha, cap)
    n = ne.n
    G1, G2 = ne.dense_G1, ne.dense_G2
    P = G1 + alpha * np.eye(n)
    fP = kernels.cholesky(P)
    W = np.zeros((2 * n, 2 * n))
    W[:n, :n] = kernels.chol_solve(fP, G2)
    W[:n, n:] = alpha * kernels.chol_solve(fP, np.eye(n))
    W[n:, :n] = np.eye(n)
    return W


def spectral_radius(ne, alpha, cap=N_CAP):
    W = build_W(ne, alpha, cap)
    return float(np.max(np.abs(kernels.dense_eigs(W, cap=2 * cap))))


def single_splitting_radius(ne, kind, alpha=None, beta=None, cap=kernels.EIG_CAP):
    """rho of the one-step iteration matrix of SP, GSP or a full ADI sweep."""
    kind = SchemeKind(kind)
    if kind is SchemeKind.DS:
        return spectral_radius(ne, alpha if alpha is not None else 1.0, min(cap // 2, N_CAP))
    if ne.n > cap:
        raise CapacityError(f"n = {ne.n} exceeds the eigensolver cap {cap}")
    s = build_scheme(ne, kind, alpha, beta)
    mats = s.matrices()
    if kind is SchemeKind.ADI:
        T1 = kernels.chol_solve(s.factors[0], mats["N1"])
        T2 = -kernels.chol_solve(s.factors[1], mats["N2"])
        T = T2 @ T1
    else:
        T = kernels.chol_solve(s.factors[0], mats["N"])
    return float(np.max(np.abs(kernels.dense_eigs(T, cap=cap))))


def unit_disk_roots(p, q):
    """Whether both roots of ``x**2 - p*x + q`` lie strictly inside the unit disk."""
    return bool(abs(q) < 1 and abs(p) < 1 + q)


def shen_spd_check(ne, alpha):
    """SPD test of ``P + S = 2*alpha*I + G1`` and ``H + 2R = G1 + G2``."""
    if alpha is None or alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    G1, G2 = ne.dense_G1, ne.dense_G2
    return kernels.is_spd(G1 + 2.0 * alpha * np.eye(ne.n)) and kernels.is_spd(G1 + G2)


def check_eigen_quadratic(ne, alpha, cap=N_CAP, ell2_tol=1e-12):
    """Verify the scalar quadratic on every eigenpair of W.

    For each eigenpair ``(lam, [l1; l2])`` the companion relation
    ``l1 = lam*l2`` is measured, the Rayleigh quotients of ``P``, ``G1`` and
    ``G2`` along ``l2`` are formed, and the residual
    ``|a*lam**2 - a2*lam - alpha| / a`` is recorded.  An eigenvector whose
    lower half vanishes (relative to `ell2_tol`) is counted as a violation.
    """
    W = build_W(ne, alpha, cap)
    n = ne.n
    lam, V = kernels.dense_eigs(W, cap=2 * cap, vectors=True)
    G1, G2 = ne.dense_G1, ne.dense_G2

    L1, L2 = V[:n, :], V[n:, :]
    vnorm = np.linalg.norm(V, axis=0)
    l2sq = np.sum(np.abs(L2) ** 2, axis=0)
    zero = np.sqrt(l2sq) <= ell2_tol * vnorm
    defect = np.linalg.norm(L1 - L2 * lam, axis=0) / vnorm

    ok = ~zero
    L2 = L2[:, ok]
    lam_ok = lam[ok]
    a1 = np.real(np.sum(L2.conj() * (G1 @ L2), axis=0)) / l2sq[ok]
    a2 = np.real(np.sum(L2.conj() * (G2 @ L2), axis=0)) / l2sq[ok]
    a = alpha + a1
    resid = np.abs(a * lam_ok**2 - a2 * lam_ok - alpha) / a

    mod = np.abs(lam)
    return SpectralReport(
        n=n,
        alpha=float(alpha),
        rho=float(mod.max()),
        eigen_quadratic_max_residual=float(resid.max()) if resid.size else 0.0,
        unit_disk_all=bool(np.all(mod < 1.0)),
        lambda_one_gap=float(np.min(np.abs(lam - 1.0))),
        shen_ok=shen_spd_check(ne, alpha),
        companion_max_defect=float(defect.max()),
        min_a1_minus_a2=float(np.min(a1 - a2)) if a1.size else float("nan"),
        ell2_zero_count=int(zero.sum()),
    )
