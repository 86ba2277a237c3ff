"""Seeded instance generators and Matrix Market persistence.

Two families are provided:

* ``ex1`` -- dense uniform ``A1`` with ``A2 = scale * eye(q, n)``;
* ``ex2`` -- a total least squares instance turned into an ILS problem via
  the smallest singular value ``sigma`` of ``(B, d)``:
  ``A = [B; sigma*I]``, ``b = [d; 0]``.

A stored problem is a directory holding ``A1.mtx``, ``A2.mtx``, ``b1.mtx``,
``b2.mtx`` and a JSON ``header.json``.
"""

import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .core import PartitionedProblem
from .errors import NonUniqueSolutionError, ProblemFormatError

HEADER = "header.json"
FILES = ("A1", "A2", "b1", "b2")

# Desk-scale stand-ins for the full-size experiments.
EX1_DESK_N = (110, 120, 130, 140)
EX1_DESK_P = 400
EX2_DESK_N = (64, 128, 256, 512)


@dataclass(frozen=True)
class Example1Config:
    p: int
    n: int
    q: int
    scale: float = 7.0
    seed: int = 0
    auto_scale: bool = False

    def __post_init__(self):
        if self.n < 1 or self.p < self.n:
            raise ValueError(f"need p >= n >= 1, got p={self.p}, n={self.n}")
        if self.q < 1:
            raise ValueError(f"need q >= 1, got {self.q}")
        if self.scale < 0 or not np.isfinite(self.scale):
            raise ValueError(f"scale must be finite and non-negative, got {self.scale}")


@dataclass(frozen=True)
class Example2Config:
    """``p`` defaults to ``n`` (square ``B``); a larger ``p`` gives a TLS
    instance with ``sigma > 0``."""

    n: int
    epsilon: float = 1e-3
    seed: int = 0
    p: int = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.p is not None and self.p < self.n:
            raise ValueError(f"need p >= n, got p={self.p}, n={self.n}")

    @property
    def rows(self):
        return self.n if self.p is None else self.p


@dataclass(frozen=True, eq=False)
class TlsReference:
    sigma: float
    x_tls: np.ndarray
    definite: bool


def gen_example1(cfg, verify=True):
    """Dense random instance: ``A1 = rand(p, n)``, ``A2 = scale * eye(q, n)``.

    With ``cfg.auto_scale`` the factor is replaced by
    ``0.9 * sqrt(lambda_min(A1^T A1))`` so that ``A^T J A`` stays SPD at small
    sizes.  ``verify=False`` skips the SPD gate (structural inspection only).

    Raises
    ------
    NonUniqueSolutionError
        If ``A^T J A`` is not SPD and `verify` is on.
    """
    rng = np.random.default_rng(cfg.seed)
    A1 = rng.random((cfg.p, cfg.n))
    b1 = rng.random(cfg.p)
    b2 = rng.random(cfg.q)
    G1 = kernels.gram(A1)
    scale = float(cfg.scale)
    if cfg.auto_scale:
        scale = 0.9 * float(np.sqrt(max(np.linalg.eigvalsh(G1)[0], 0.0)))
    A2 = sp.csc_matrix(sp.eye(cfg.q, cfg.n, format="csc") * scale)
    meta = {
        "generator": "ex1",
        "p": cfg.p,
        "q": cfg.q,
        "n": cfg.n,
        "seed": cfg.seed,
        "scale": scale,
        "auto_scale": cfg.auto_scale,
    }
    prob = PartitionedProblem(A1, A2, b1, b2, meta)
    if verify and not kernels.is_spd(G1 - kernels.gram(A2)):
        raise NonUniqueSolutionError("instance has no unique ILS solution; enable auto_scale or change dims")
    return prob


def _orthogonal(rng, k):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    # sign fix makes the distribution Haar
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def _smallest_augmented_sv(B, d):
    """sigma_{n+1} of the p x (n+1) matrix (B, d); zero when p <= n."""
    p, n = B.shape
    if p < n + 1:
        return 0.0
    s = np.linalg.svd(np.column_stack([B, d]), compute_uv=False)
    return float(s[n])


def gen_example2(cfg):
    """TLS-derived instance; returns ``(problem, TlsReference)``.

    ``B~ = Y diag(D, 0) Z^T`` with ``D = diag(1, 1/2, ..., 1/n)``,
    ``B = B~ + eps*E`` and ``d = B~ 1_n + eps*f``.  ``x_tls`` is the solution
    of ``(B^T B - sigma^2 I) x = B^T d`` when that matrix is SPD, otherwise
    ``None`` (and ``definite`` is False).
    """
    n, p, eps = cfg.n, cfg.rows, float(cfg.epsilon)
    rng = np.random.default_rng(cfg.seed)
    Y = _orthogonal(rng, p)
    Z = _orthogonal(rng, n)
    E = rng.standard_normal((p, n))
    f = rng.standard_normal(p)
    Dfull = np.zeros((p, n))
    Dfull[np.arange(n), np.arange(n)] = 1.0 / np.arange(1, n + 1)
    Bt = Y @ Dfull @ Z.T
    B = Bt + eps * E
    d = Bt @ np.ones(n) + eps * f

    sigma = _smallest_augmented_sv(B, d)
    K = kernels.gram(B)
    K[np.diag_indices(n)] -= sigma**2
    definite = kernels.is_spd(K)
    x_tls = np.linalg.solve(K, B.T @ d) if definite else None

    idx = np.arange(n)
    A2 = sp.csc_matrix((np.full(n, sigma), (idx, idx)), shape=(n, n))
    meta = {
        "generator": "ex2",
        "p": p,
        "q": n,
        "n": n,
        "seed": cfg.seed,
        "epsilon": eps,
        "sigma": sigma,
        "definite": definite,
    }
    prob = PartitionedProblem(B, A2, d, np.zeros(n), meta)
    return prob, TlsReference(sigma, x_tls, definite)


def write_problem(prob, path):
    """Store `prob` under directory `path` (created if needed)."""
    os.makedirs(path, exist_ok=True)
    blocks = {
        "A1": prob.A1,
        "A2": prob.A2,
        "b1": prob.b1.reshape(-1, 1),
        "b2": prob.b2.reshape(-1, 1),
    }
    for name, M in blocks.items():
        fn = os.path.join(path, name + ".mtx")
        if sp.issparse(M):
            _write_coordinate(fn, M)
        else:
            _write_array(fn, np.asarray(M))
    header = dict(prob.meta)
    header.update(p=prob.p, q=prob.q, n=prob.n)
    with open(os.path.join(path, HEADER), "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return header


def _write_array(fn, M):
    # written by hand so that empty (0 x n) blocks survive the round trip
    rows, cols = M.shape
    with open(fn, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{rows} {cols}\n")
        for v in M.T.reshape(-1):
            fh.write(f"{float(v)!r}\n")


def _write_coordinate(fn, M):
    # stored entries are written as-is, explicit zeros included
    C = sp.coo_matrix(M)
    with open(fn, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{C.shape[0]} {C.shape[1]} {C.nnz}\n")
        for i, j, v in zip(C.row, C.col, C.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def _read_block(fn):
    with open(fn) as fh:
        banner = fh.readline().split()
        if len(banner) < 5 or banner[0].lower() != "%%matrixmarket":
            raise ProblemFormatError(f"{fn}: not a Matrix Market file")
        fmt = banner[2].lower()
        if fmt == "array":
            line = fh.readline()
            while line.startswith("%"):
                line = fh.readline()
            try:
                rows, cols = (int(t) for t in line.split())
                vals = np.array([float(t) for t in fh.read().split()])
            except ValueError as exc:
                raise ProblemFormatError(f"{fn}: {exc}") from exc
            if vals.size != rows * cols:
                raise ProblemFormatError(f"{fn}: expected {rows * cols} values, found {vals.size}")
            return vals.reshape(cols, rows).T.copy()
        if fmt != "coordinate":
            raise ProblemFormatError(f"{fn}: unsupported Matrix Market format {fmt!r}")
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        try:
            rows, cols, nnz = (int(t) for t in line.split())
            body = np.array(fh.read().split(), dtype=float).reshape(-1, 3) if nnz else np.zeros((0, 3))
        except ValueError as exc:
            raise ProblemFormatError(f"{fn}: {exc}") from exc
        if body.shape[0] != nnz:
            raise ProblemFormatError(f"{fn}: expected {nnz} entries, found {body.shape[0]}")
        i = body[:, 0].astype(int) - 1
        j = body[:, 1].astype(int) - 1
        if nnz and (i.min() < 0 or j.min() < 0 or i.max() >= rows or j.max() >= cols):
            raise ProblemFormatError(f"{fn}: index out of range")
        return sp.csc_matrix((body[:, 2], (i, j)), shape=(rows, cols))


def read_problem(path):
    """Load a problem stored by :func:`write_problem`.

    Raises
    ------
    ProblemFormatError
        Missing or malformed files, or a header inconsistent with the payload.
    """
    if not os.path.isdir(path):
        raise ProblemFormatError(f"{path}: not a problem directory")
    try:
        with open(os.path.join(path, HEADER)) as fh:
            header = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemFormatError(f"{path}: bad or missing header: {exc}") from exc
    blocks = {}
    for name in FILES:
        fn = os.path.join(path, name + ".mtx")
        if not os.path.exists(fn):
            raise ProblemFormatError(f"{fn}: missing")
        blocks[name] = _read_block(fn)
    try:
        p, q, n = int(header["p"]), int(header["q"]), int(header["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}: header lacks p/q/n: {exc}") from exc
    A1, A2 = blocks["A1"], blocks["A2"]
    if p + q != A1.shape[0] + A2.shape[0] or A1.shape != (p, n) or A2.shape != (q, n):
        raise ProblemFormatError(
            f"{path}: header says p={p}, q={q}, n={n} but A1 is {A1.shape} and A2 is {A2.shape}"
        )
    b1 = np.asarray(_dense(blocks["b1"])).reshape(-1)
    b2 = np.asarray(_dense(blocks["b2"])).reshape(-1)
    if b1.shape[0] != p or b2.shape[0] != q:
        raise ProblemFormatError(f"{path}: right-hand side lengths do not match header")
    return PartitionedProblem(A1, A2, b1, b2, header)


def _dense(M):
    return M.toarray() if sp.issparse(M) else M
