"""Command-line harness: ``ils-split {generate,solve,bench,sweep-alpha,spectral}``.

Exit codes: 0 success (non-converged results included), 2 SPD gate failure
in ``generate``, 64 usage, 65 capability (eigensolver cap), 66 I/O.
"""

import argparse
import json
import logging
import os
import sys

from threadpoolctl import threadpool_limits

from . import bench, problems, spectral
from .core import assemble_normal
from .errors import CapacityError, NonUniqueSolutionError, ParameterError, ProblemFormatError
from .solvers import K_MAX, TOL, SchemeKind, default_parameters

EX_OK = 0
EX_SPD = 2
EX_USAGE = 64
EX_CAP = 65
EX_IO = 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text, out=None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args):
    if args.generator == "ex1":
        if args.q is None:
            args.q = args.n
        cfg = problems.Example1Config(args.p, args.n, args.q, args.scale, args.seed, args.auto_scale)
        prob = problems.gen_example1(cfg)
    else:
        cfg = problems.Example2Config(args.n, args.epsilon, args.seed, args.p)
        prob, _ = problems.gen_example2(cfg)
    header = problems.write_problem(prob, args.out)
    print(json.dumps(header, sort_keys=True))
    return EX_OK


def _params(args, prob):
    kind = SchemeKind(args.method)
    d_alpha, d_beta = default_parameters(kind, prob.meta.get("generator"))
    alpha = d_alpha if args.alpha is None else args.alpha
    beta = d_beta if args.beta is None else args.beta
    return kind, alpha, beta


def cmd_solve(args):
    prob = problems.read_problem(args.problem)
    ne = assemble_normal(prob)
    kind, alpha, beta = _params(args, prob)
    row = bench.solve_cell(prob, ne, kind, alpha, beta, args.tol, args.kmax, args.repetitions, args.spectral)
    out = row.to_dict()
    out.update(tol=args.tol, k_max=args.kmax)
    print(json.dumps(out))
    return EX_OK


def cmd_bench(args):
    if args.preset:
        cfg = bench.paper_desk_config(args.repetitions or 3, args.spectral)
    elif args.config:
        cfg = bench.CampaignConfig.from_json(args.config)
        if args.repetitions:
            cfg.repetitions = args.repetitions
        if args.spectral:
            cfg.spectral = True
    else:
        raise UsageError("bench needs --config FILE or --preset paper-desk")
    if args.parallel:
        cfg.parallel = True
    rows = bench.run_campaign(cfg)
    _emit(bench.to_csv(rows), args.out)
    if args.preset and args.out_dir:
        _write_preset_dir(args.out_dir, rows, cfg)
    return EX_OK


def _write_preset_dir(out_dir, rows, cfg):
    os.makedirs(out_dir, exist_ok=True)
    ex1 = [r for r, s in zip(rows, _row_specs(cfg)) if s["generator"] == "ex1"]
    ex2 = [r for r, s in zip(rows, _row_specs(cfg)) if s["generator"] == "ex2"]
    _emit(bench.to_csv(ex1), os.path.join(out_dir, "table1.csv"))
    _emit(bench.to_csv(ex2), os.path.join(out_dir, "table2.csv"))
    for n in problems.EX1_DESK_N:
        prob = problems.gen_example1(problems.Example1Config(problems.EX1_DESK_P, n, n, seed=1, auto_scale=True))
        sw = bench.sweep_alpha(prob, bench.geometric_grid(*bench.FIG1_GRID), repetitions=cfg.repetitions)
        _emit(bench.to_csv(sw, bench.SWEEP_COLUMNS), os.path.join(out_dir, f"figure1_n{n}.csv"))
    prob, _ = problems.gen_example2(problems.Example2Config(bench.FIG2_N, 1e-3, seed=7))
    sw = bench.sweep_alpha(prob, bench.geometric_grid(*bench.FIG2_GRID), repetitions=cfg.repetitions)
    _emit(bench.to_csv(sw, bench.SWEEP_COLUMNS), os.path.join(out_dir, "figure2.csv"))


def _row_specs(cfg):
    for spec in cfg.instances:
        for _ in bench.expand_methods(cfg.methods, spec.get("generator")):
            yield spec


def _instance_from_args(args):
    if args.problem:
        return problems.read_problem(args.problem)
    if args.generator == "ex1":
        q = args.q if args.q is not None else args.n
        return problems.gen_example1(problems.Example1Config(args.p, args.n, q, args.scale, args.seed, args.auto_scale))
    if args.generator == "ex2":
        return problems.gen_example2(problems.Example2Config(args.n, args.epsilon, args.seed, args.p))[0]
    raise UsageError("give --problem DIR or --generator ex1|ex2")


def cmd_sweep_alpha(args):
    prob = _instance_from_args(args)
    grid = bench.geometric_grid(args.alpha_min, args.alpha_max, args.points)
    rows = bench.sweep_alpha(prob, grid, args.method, args.tol, args.kmax, args.repetitions,
                             with_rho=prob.n <= spectral.N_CAP)
    _emit(bench.to_csv(rows, bench.SWEEP_COLUMNS), args.out)
    return EX_OK


def cmd_spectral(args):
    prob = problems.read_problem(args.problem)
    ne = assemble_normal(prob)
    alpha = args.alpha
    if alpha is None:
        alpha, _ = default_parameters(SchemeKind.DS, prob.meta.get("generator"))
    rep = spectral.check_eigen_quadratic(ne, alpha)
    print(json.dumps(rep.to_dict()))
    return EX_OK


def _solver_opts(p):
    p.add_argument("--tol", type=float, default=TOL)
    p.add_argument("--kmax", type=int, default=K_MAX)
    p.add_argument("--repetitions", type=int, default=1)


def _generator_opts(p, required):
    p.add_argument("--p", type=int)
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--q", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=7.0)
    p.add_argument("--auto-scale", action="store_true")
    p.add_argument("--epsilon", type=float, default=1e-3)


def build_parser():
    parser = _Parser(prog="ils-split", description="Splitting iterations for indefinite least squares.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="generate and store an instance")
    g.add_argument("generator", choices=["ex1", "ex2"])
    _generator_opts(g, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve a stored instance once")
    s.add_argument("--problem", required=True)
    s.add_argument("--method", choices=[k.value for k in SchemeKind], default="DS")
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--spectral", action="store_true")
    _solver_opts(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a campaign and write CSV")
    b.add_argument("--config")
    b.add_argument("--preset", choices=["paper-desk"])
    b.add_argument("--out")
    b.add_argument("--out-dir", help="with --preset: also write table and figure CSVs here")
    b.add_argument("--repetitions", type=int)
    b.add_argument("--spectral", action="store_true")
    b.add_argument("--parallel", action="store_true", help="run cells concurrently; timing columns blank")
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("sweep-alpha", help="iterations/time over a geometric alpha grid")
    w.add_argument("--problem")
    w.add_argument("--generator", choices=["ex1", "ex2"])
    _generator_opts(w, required=False)
    w.add_argument("--method", choices=["DS", "GSP"], default="DS")
    w.add_argument("--alpha-min", type=float, default=1e-5)
    w.add_argument("--alpha-max", type=float, default=1e2)
    w.add_argument("--points", type=int, default=8)
    w.add_argument("--out")
    _solver_opts(w)
    w.set_defaults(func=cmd_sweep_alpha)

    e = sub.add_parser("spectral", help="eigen-analysis of the DS iteration matrix")
    e.add_argument("--problem", required=True)
    e.add_argument("--alpha", type=float)
    e.set_defaults(func=cmd_spectral)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = int(os.environ.get("ILS_SPLIT_THREADS", "1"))
    try:
        with threadpool_limits(limits=max(threads, 1)):
            return args.func(args)
    except NonUniqueSolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_SPD if args.command == "generate" else EX_USAGE
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_CAP
    except (ProblemFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
