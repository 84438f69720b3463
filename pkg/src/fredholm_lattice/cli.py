"""Command-line interface.

Exit codes: 0 success, 1 hypothesis or property failure, 2 input error,
3 iteration cap reached.
"""
from __future__ import annotations

import argparse
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import kernels, order
from .conjugation import reflect_problem
from .expr import EvaluationError
from .grid import SampleError
from .oracle import SingularSystemError, assemble, gauss_legendre_solution, solve_linear
from .operator import check_hypotheses
from .problem import ProblemFile, ProblemFileError, dump_text, dumps, format_number, load
from .solver import HypothesisError, IterateEscapedError, SolverConfig, refinement_delta, solve

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NONCONVERGENCE = 0, 1, 2, 3
MARGIN_CHECKS = {"margin_nonneg", "margin_interval"}


def _render(data: dict, as_json: bool) -> str:
    if as_json:
        return dumps(data) + "\n"
    lines = []
    for key, value in data.items():
        if isinstance(value, list):
            lines.append(f"{key}:")
            for item in value:
                if isinstance(item, dict):
                    parts = [f"{k}={_scalar(v)}" for k, v in item.items() if v not in (None, "")]
                    lines.append("  - " + " ".join(parts))
                else:
                    lines.append(f"  - {_scalar(item)}")
        else:
            lines.append(f"{key}: {_scalar(value)}")
    return "\n".join(lines) + "\n"


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_number(v)
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_scalar(x) for x in v) + ")"
    return str(v)


def _report_dict(report) -> dict:
    return {
        "passed": report.passed,
        "margin": report.margin_value,
        "n": report.n,
        "checks": [{"name": r.name, "status": "PASS" if r.passed else "FAIL",
                    "witness": r.witness, "detail": r.detail} for r in report.records],
        "notes": list(report.notes),
    }


def _grid_n(args, problem: ProblemFile) -> int:
    return args.n if getattr(args, "n", None) else problem.grid_n


def cmd_check(args) -> int:
    problem = load(args.problem)
    report = check_hypotheses(problem.spec, problem.spec.grid(_grid_n(args, problem)))
    sys.stdout.write(_render(_report_dict(report), args.json))
    return EXIT_OK if report.passed else EXIT_FAIL


def _solution_csv(result) -> str:
    out = io.StringIO()
    out.write("t,phi_min,phi_max\n")
    for t, lo, hi in zip(result.phi_min.grid.nodes, result.phi_min.values, result.phi_max.values):
        out.write(f"{t:.17g},{lo:.17g},{hi:.17g}\n")
    return out.getvalue()


def _default_out(problem_path: str, suffix: str) -> Path:
    return Path(Path(problem_path).stem + suffix)


def cmd_solve(args) -> int:
    problem = load(args.problem)
    cfg = SolverConfig(tol=args.tol or problem.tol,
                       max_iter=args.max_iter or problem.max_iter,
                       force=args.force, threads=args.threads)
    n = _grid_n(args, problem)
    try:
        result = solve(problem.spec, cfg=cfg, n=n)
    except HypothesisError as exc:
        sys.stderr.write(f"error: {exc} (use 'check' for details"
                         f"{', or --force' if set(exc.report.failed) <= MARGIN_CHECKS else ''})\n")
        sys.stdout.write(_render(_report_dict(exc.report), args.json))
        return EXIT_FAIL
    except IterateEscapedError as exc:
        sys.stderr.write(f"error: forced run aborted: {exc}\n")
        return EXIT_FAIL

    out = Path(args.out) if args.out else _default_out(args.problem, ".solution.csv")
    out.write_text(_solution_csv(result))
    if args.trace:
        rows = ["k,residual_low,residual_high,gap"]
        rows += [f"{k},{format_number(rl)},{format_number(rh)},{format_number(g)}"
                 for k, rl, rh, g in result.trace]
        Path(args.trace).write_text("\n".join(rows) + "\n")
    summary = result.summary()
    summary["solution_csv"] = str(out)
    if args.refine:
        delta = refinement_delta(problem.spec, n, cfg)
        summary["refinement_delta_min"] = delta["delta_min"]
        summary["refinement_delta_max"] = delta["delta_max"]
    sys.stdout.write(_render(summary, args.json))
    if not result.converged:
        sys.stderr.write(f"error: iteration cap {cfg.max_iter} reached\n")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_oracle(args) -> int:
    problem = load(args.problem)
    spec = problem.spec
    grid = spec.grid(_grid_n(args, problem))
    try:
        if args.gauss:
            phi = gauss_legendre_solution(spec, grid, args.gauss)
        else:
            phi = solve_linear(assemble(spec, grid))
    except SingularSystemError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL
    text = io.StringIO()
    text.write("t,value\n")
    for t, v in zip(grid.nodes, phi.values):
        text.write(f"{t:.17g},{v:.17g}\n")
    if args.out:
        Path(args.out).write_text(text.getvalue())
    else:
        sys.stdout.write(text.getvalue())
    if args.compare:
        cfg = SolverConfig(tol=problem.tol, max_iter=problem.max_iter, threads=args.threads)
        try:
            result = solve(spec, cfg=cfg, n=grid.n)
        except HypothesisError as exc:
            sys.stderr.write(f"error: cannot compare, {exc}\n")
            return EXIT_FAIL
        stats = {
            "oracle_vs_phi_min": float(np.max(np.abs(phi.values - result.phi_min.values))),
            "oracle_vs_phi_max": float(np.max(np.abs(phi.values - result.phi_max.values))),
        }
        sys.stderr.write(_render(stats, args.json))
    return EXIT_OK


def cmd_transform(args) -> int:
    problem = load(args.problem)
    reflected = ProblemFile(reflect_problem(problem.spec), problem.grid_n, problem.tol,
                            problem.max_iter)
    text = dump_text(reflected)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_lattice_selftest(args) -> int:
    report = order.selftest(seed=args.seed, cases=args.cases,
                            strict_sublattice=args.strict_sublattice)
    data = {
        "seed": report.seed,
        "cases": report.cases,
        "failures": len(report.failures),
        "largest_lattice": report.largest,
        "max_fixed_points": report.max_fixed_points,
        "not_sublattice_of_L": len(report.not_sublattice),
        "passed": report.passed,
    }
    if report.failures:
        data["failed_cases"] = [f"case {c}: {msg}" for c, msg in report.failures[:20]]
    sys.stdout.write(_render(data, args.json))
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for the kernel (default: all cores)")

    parser = argparse.ArgumentParser(
        prog="fredholm-lattice",
        description="Extremal monotone solutions of Fredholm equations of the second kind.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check the existence hypotheses")
    p.add_argument("problem")
    p.add_argument("--n", type=int, help="grid nodes (overrides grid_n)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="bracket the extremal solutions")
    p.add_argument("problem")
    p.add_argument("--tol", type=float)
    p.add_argument("--n", type=int, help="grid nodes (overrides grid_n)")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--trace", metavar="CSV", help="write k,residual_low,residual_high,gap rows")
    p.add_argument("--force", action="store_true",
                   help="iterate even when only the margin condition fails")
    p.add_argument("--out", metavar="CSV", help="solution CSV (default: <problem>.solution.csv)")
    p.add_argument("--refine", action="store_true",
                   help="also report the change under grid refinement n -> 2n-1")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", parents=[common], help="Nystrom dense-solve reference")
    p.add_argument("problem")
    p.add_argument("--n", type=int)
    p.add_argument("--out", metavar="CSV")
    p.add_argument("--gauss", type=int, metavar="M",
                   help="use M-point Gauss-Legendre instead of the trapezoid rule")
    p.add_argument("--compare", action="store_true",
                   help="also run the bracketing solver and report sup-norm differences on stderr")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("transform", parents=[common], help="print the reflected problem file")
    p.add_argument("problem")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("lattice-selftest", parents=[common],
                       help="check the fixed-point theorem on random finite lattices")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--strict-sublattice", action="store_true",
                   help="also fail when a fixed-point set is not closed under the join/meet of L")
    p.set_defaults(func=cmd_lattice_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    logging.getLogger(__name__).info("kernel backend: %s", kernels.BACKEND)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except ProblemFileError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (SampleError, EvaluationError) as exc:
        sys.stderr.write(f"error: cannot evaluate problem data: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
