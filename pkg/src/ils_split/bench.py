"""Benchmark campaigns: method x parameter grids over stored or generated instances."""

import csv
import io
import itertools
import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import problems, spectral
from .core import assemble_normal
from .errors import CapacityError, DivergenceError, ParameterError
from .solvers import K_MAX, TOL, SchemeKind, build_scheme, default_parameters, run

log = logging.getLogger(__name__)

COLUMNS = (
    "method", "p", "q", "n", "alpha", "beta", "it",
    "setup_seconds", "loop_seconds", "final_res", "converged", "rho",
)
SWEEP_COLUMNS = ("alpha", "it", "setup_seconds", "loop_seconds", "rho", "converged", "final_res")


@dataclass
class BenchRow:
    method: str
    p: int
    q: int
    n: int
    alpha: float = None
    beta: float = None
    it: int = 0
    setup_seconds: float = None
    loop_seconds: float = None
    final_res: float = float("nan")
    converged: bool = False
    rho: float = None

    def to_dict(self):
        return asdict(self)


@dataclass
class SweepRow:
    alpha: float
    it: int
    setup_seconds: float
    loop_seconds: float
    rho: float
    converged: bool
    final_res: float


@dataclass
class CampaignConfig:
    """Campaign description; see README for the JSON schema."""

    instances: list
    methods: list
    tol: float = TOL
    k_max: int = K_MAX
    repetitions: int = 3
    spectral: bool = False
    parallel: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.k_max < 1:
            raise ParameterError(f"k_max must be at least 1, got {self.k_max}")
        if self.repetitions < 1:
            raise ParameterError(f"repetitions must be at least 1, got {self.repetitions}")
        if not self.instances or not self.methods:
            raise ParameterError("a campaign needs at least one instance and one method")
        for m in self.methods:
            try:
                SchemeKind(m["method"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParameterError(f"bad method entry {m!r}") from exc

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown campaign keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ParameterError(str(exc)) from exc

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def load_instance(spec):
    """Materialize an instance description (generator settings or a stored path)."""
    spec = dict(spec)
    if "path" in spec:
        return problems.read_problem(spec["path"])
    gen = spec.pop("generator", None)
    if gen == "ex1":
        return problems.gen_example1(problems.Example1Config(**spec))
    if gen == "ex2":
        return problems.gen_example2(problems.Example2Config(**spec))[0]
    raise ParameterError(f"unknown generator {gen!r}")


def _as_list(v):
    if v is None:
        return [None]
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


def expand_methods(methods, generator=None):
    """Yield ``(kind, alpha, beta)`` cells in config order; missing parameters
    take the defaults for the instance family."""
    for m in methods:
        kind = SchemeKind(m["method"])
        d_alpha, d_beta = default_parameters(kind, generator)
        alphas = _as_list(m.get("alpha"))
        betas = _as_list(m.get("beta"))
        for a, b in itertools.product(alphas, betas):
            a = d_alpha if a is None else float(a)
            b = d_beta if b is None else float(b)
            if kind in (SchemeKind.SP,):
                a = None
            if kind is not SchemeKind.ADI:
                b = None
            yield kind, a, b


def _rho(ne, kind, alpha, beta):
    try:
        if kind is SchemeKind.DS:
            return spectral.spectral_radius(ne, alpha)
        return spectral.single_splitting_radius(ne, kind, alpha, beta)
    except CapacityError:
        return None


def solve_cell(prob, ne, kind, alpha=None, beta=None, tol=TOL, k_max=K_MAX,
               repetitions=1, with_rho=False, timed=True):
    """One benchmark cell; timings are medians over `repetitions` runs.

    Raises only for invalid parameters; divergence and non-convergence are
    reported in the row.
    """
    kind = SchemeKind(kind)
    row = BenchRow(kind.value, prob.p, prob.q, prob.n, alpha, beta)
    setups, loops = [], []
    try:
        for _ in range(repetitions):
            s = build_scheme(ne, kind, alpha, beta)
            rep = run(s, ne, tol=tol, k_max=k_max)
            setups.append(rep.setup_elapsed)
            loops.append(rep.elapsed)
        row.alpha, row.beta = s.alpha, s.beta
        row.it = rep.iterations
        row.final_res = rep.final_res
        row.converged = rep.converged
    except DivergenceError as exc:
        log.info("%s diverged: %s", kind.value, exc)
        row.it = exc.step
        row.converged = False
    if timed and loops:
        row.setup_seconds = statistics.median(setups)
        row.loop_seconds = statistics.median(loops)
    if with_rho:
        row.rho = _rho(ne, kind, row.alpha, row.beta)
    return row


def _cells(cfg):
    for spec in cfg.instances:
        try:
            prob = load_instance(spec)
        except Exception as exc:
            log.warning("instance %r failed: %s", spec, exc)
            yield None, None, None, spec
            continue
        ne = assemble_normal(prob)
        gen = prob.meta.get("generator")
        for kind, a, b in expand_methods(cfg.methods, gen):
            yield (kind, a, b), prob, ne, spec


def _run_cell(cfg, cell, prob, ne, spec, timed):
    if prob is None:
        return [
            BenchRow(k.value, spec.get("p", 0) or 0, spec.get("q", 0) or 0, spec.get("n", 0) or 0, a, b)
            for k, a, b in expand_methods(cfg.methods, spec.get("generator"))
        ]
    kind, a, b = cell
    try:
        return [solve_cell(prob, ne, kind, a, b, cfg.tol, cfg.k_max, cfg.repetitions, cfg.spectral, timed)]
    except Exception as exc:
        log.warning("cell %s alpha=%s beta=%s failed: %s", kind.value, a, b, exc)
        return [BenchRow(kind.value, prob.p, prob.q, prob.n, a, b)]


def run_campaign(cfg):
    """All rows of a campaign in config order; failures become non-converged rows."""
    cells = list(_cells(cfg))
    if cfg.parallel:
        with ThreadPoolExecutor() as pool:
            chunks = list(pool.map(lambda c: _run_cell(cfg, c[0], c[1], c[2], c[3], False), cells))
    else:
        chunks = [_run_cell(cfg, *c, timed=True) for c in cells]
    return [row for chunk in chunks for row in chunk]


def sweep_alpha(prob, alphas, method="DS", tol=TOL, k_max=K_MAX, repetitions=1, with_rho=True):
    """Iterations and timings of DS (or GSP) over a grid of alpha values."""
    kind = SchemeKind(method)
    if kind not in (SchemeKind.DS, SchemeKind.GSP):
        raise ParameterError(f"sweep-alpha supports DS and GSP, not {kind.value}")
    ne = assemble_normal(prob)
    out = []
    for a in alphas:
        r = solve_cell(prob, ne, kind, float(a), None, tol, k_max, repetitions, with_rho)
        out.append(SweepRow(float(a), r.it, r.setup_seconds, r.loop_seconds, r.rho, r.converged, r.final_res))
    return out


def geometric_grid(lo, hi, points):
    if points < 1 or not (0 < lo <= hi):
        raise ParameterError(f"bad alpha grid: lo={lo}, hi={hi}, points={points}")
    if points == 1:
        return [float(lo)]
    return [float(v) for v in np.geomspace(lo, hi, points)]


def paper_desk_config(repetitions=3, spectral=False):
    """Desk-scale analogue of both comparison tables."""
    insts = [
        {"generator": "ex1", "p": problems.EX1_DESK_P, "n": n, "q": n, "seed": 1, "auto_scale": True}
        for n in problems.EX1_DESK_N
    ]
    insts += [{"generator": "ex2", "n": n, "epsilon": 1e-3, "seed": 7} for n in problems.EX2_DESK_N]
    methods = [{"method": k.value} for k in SchemeKind]
    return CampaignConfig(insts, methods, repetitions=repetitions, spectral=spectral)


# alpha grids for the desk analogues of the alpha-vs-CPU figures
FIG1_GRID = (1e-3, 1e4, 8)
FIG2_GRID = (1e-5, 1e2, 8)
FIG2_N = problems.EX2_DESK_N[0]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows, columns=COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in columns])
    return buf.getvalue()
