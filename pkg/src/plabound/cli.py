"""Command line entry point: ``plabound {solve,region,sweep,wishart,perturb}``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure. Every output
starts with a ``# config: {...}`` line holding the resolved configuration.
A ``--config FILE`` JSON object supplies defaults for any option; explicit
flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .covmodel import ScenarioSpec, validate
from .errors import DomainError, NumericalDivergenceError, SolverPreconditionError, StructuralError
from .fileio import dumps_solution, load_scenario, load_solution
from .gaussian_info import region_boundary
from .solver import MAX_ITER, REL_TOL, perturb_and_check, solve

logger = logging.getLogger("plabound")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class InputError(Exception):
    pass


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _complex(s: str) -> complex:
    return complex(s.replace(" ", ""))


def create_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-iter", type=int, default=MAX_ITER)
    common.add_argument("--rel-tol", type=float, default=REL_TOL)
    common.add_argument("--out", type=str, default=None, help="output path (default: stdout)")
    common.add_argument("--config", type=str, default=None, help="JSON file with option defaults")
    common.add_argument("--verbose", action="store_true")

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--scenario", type=str, help="scenario file")
    scen.add_argument("--identity", type=int, metavar="N", help="identity-block scenario of size N")
    scen.add_argument("--wishart", type=int, metavar="N", help="Wishart scenario of size N (uses --seed)")
    scen.add_argument("--field", choices=("real", "complex"), default="real")
    scen.add_argument("--rho", type=_complex, default=0.0)
    scen.add_argument("--sigma", type=_complex, default=None)
    scen.add_argument("--tau", type=_complex, default=None)

    p = argparse.ArgumentParser(prog="plabound", description="Tightest error-region bound under an optimal Gaussian forging attack")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[common, scen], help="solve one scenario, write a solution file")

    r = sub.add_parser("region", parents=[common, scen], help="error-region boundary as CSV alpha,beta_low")
    r.add_argument("--d-star", type=float, default=None, help="use this divergence instead of solving")
    r.add_argument("--alpha-grid", type=_floats, default=None, help="comma separated alphas")
    r.add_argument("--alpha-points", type=int, default=99)

    s = sub.add_parser("sweep", parents=[common], help="identity scenarios over n and rho")
    s.add_argument("--n-list", type=_ints, default=[2, 4, 8, 16, 32, 64])
    s.add_argument("--rho-list", type=_floats, default=[0.1, 0.5, 0.7])
    s.add_argument("--sigma", type=_complex, default=None)
    s.add_argument("--tau", type=_complex, default=None)

    w = sub.add_parser("wishart", parents=[common], help="random Wishart ensemble")
    w.add_argument("--n-list", type=_ints, default=[2, 4, 8])
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--field", choices=("real", "complex"), default="real")
    w.add_argument("--feasibility-only", action="store_true", help="skip the solver, only test the relaxed solution")
    w.add_argument("--summary", type=str, default=None, help="summary JSON path")

    q = sub.add_parser("perturb", parents=[common], help="random perturbations around a stored solution")
    q.add_argument("solution", type=str)
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--scale", type=float, default=0.01)
    q.add_argument("--tol", type=float, default=1e-12)
    return p


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _config_line(args) -> str:
    cfg = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("verbose",)}
    return "# config: " + json.dumps(cfg, sort_keys=True, default=_jsonable)


def _scenario(args):
    chosen = [x is not None for x in (args.scenario, args.identity, args.wishart)]
    if sum(chosen) != 1:
        raise InputError("give exactly one of --scenario, --identity N, --wishart N")
    if args.scenario:
        return load_scenario(args.scenario)
    if args.identity is not None:
        return ScenarioSpec("identity_block", args.identity, rho=args.rho, sigma=args.sigma, tau=args.tau).build()
    return ScenarioSpec("wishart", args.wishart, seed=args.seed, field=args.field).build()


def _valid_scenario(args):
    K = _scenario(args)
    report = validate(K)
    if not report.ok:
        raise InputError(f"invalid scenario: {report}")
    return K


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(row[h]) if isinstance(row[h], float) else row[h] for h in header])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    K = _valid_scenario(args)
    sol = solve(K, max_iter=args.max_iter, rel_tol=args.rel_tol)
    _emit(args, _config_line(args) + "\n" + dumps_solution(K, sol))
    summary = (f"J*={sol.j_star!r} D*={sol.d_star!r} iterations={sol.iterations} "
               f"projected={int(sol.projected)} residual={sol.stationarity_residual:.3e} "
               f"converged={int(sol.converged)}")
    print(summary, file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_region(args) -> int:
    if args.d_star is not None:
        d_star = args.d_star
    else:
        d_star = solve(_valid_scenario(args), max_iter=args.max_iter, rel_tol=args.rel_tol).d_star
    grid = args.alpha_grid if args.alpha_grid is not None else experiments.default_alpha_grid(args.alpha_points)
    bound = region_boundary(d_star, grid)
    _emit(args, _config_line(args) + f"\n# d_star: {d_star!r}\n" + bound.to_csv())
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = experiments.sweep(args.n_list, args.rho_list, args.sigma, args.tau, args.max_iter, args.rel_tol)
    header = ["n", "rho", "J_cf", "J_iter", "D_iter", "eta", "projected", "iters"]
    _emit(args, _config_line(args) + "\n" + _csv(rows, header))
    return EXIT_OK


def cmd_wishart(args) -> int:
    rows, summary = experiments.wishart_ensemble(
        args.n_list, args.trials, args.seed, args.field, not args.feasibility_only, args.max_iter, args.rel_tol)
    header = ["n", "trial", "feasible_cf"]
    if not args.feasibility_only:
        header += ["J_cf", "J_iter", "D_iter", "eta", "iters"]
    _emit(args, _config_line(args) + "\n" + _csv(rows, header))
    text = json.dumps({"config": json.loads(_config_line(args)[len("# config: "):]), "summary": summary},
                      indent=2, sort_keys=True) + "\n"
    if args.summary:
        Path(args.summary).write_text(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_perturb(args) -> int:
    K, sol = load_solution(args.solution)
    rep = perturb_and_check(K, sol, scale=args.scale, trials=args.trials, seed=args.seed, tol=args.tol)
    out = {
        "config": json.loads(_config_line(args)[len("# config: "):]),
        "j_star": rep.j_star,
        "min_J_found": rep.min_J_found,
        "improved": rep.improved,
        "max_improvement": rep.max_improvement,
        "deltas": [float(d) for d in rep.deltas],
    }
    _emit(args, json.dumps(out, indent=2, default=_jsonable) + "\n")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "region": cmd_region, "sweep": cmd_sweep,
            "wishart": cmd_wishart, "perturb": cmd_perturb}


def _parse(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = json.loads(Path(known.config).read_text())
        args = parser.parse_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        return parser.parse_args(argv)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = create_parser()
    try:
        args = _parse(parser, argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (NumericalDivergenceError, SolverPreconditionError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, StructuralError, DomainError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

if __name__ == "__main__":
    sys.exit(main())
