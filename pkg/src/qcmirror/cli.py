"""Command-line front end.

    qcmirror solve PROBLEM [--epsilon E] [--theta0 T] [--format json|csv] [--out PATH]
    qcmirror certify PROBLEM [--x-star auto|v1,v2,...]
    qcmirror interp-check PROBLEM [--segments N] [--seed S] [--L L] [--delta D]
    qcmirror bench (PROBLEM | --builtin NAME) [--eps-list 0.2,0.1] [--jobs J]

Exit status is 0 when every evaluated check holds, 1 when one fails and 2 on
bad input. JSON reports are byte-identical across runs with the same
arguments except for the ``timestamp`` field.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import certify as certify_run
from .benchmarks import BENCH_EPSILONS, BENCHMARKS
from .bruteforce import grid_minimize
from .errors import InvalidInputError, ProblemFormatError, UnsupportedError
from .funclib import Example1Lifted
from .geometry import Box
from .interp import check_interpolation, sample_segments
from .problem_io import problem_from_dict, read_document
from .solver import Problem, StopReason, solve

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR = 0, 1, 2
STEP_COLUMNS = ["iteration", "kind", "constraint_index", "step_size", "subgradient_dual_norm",
                "objective_value", "max_constraint_value"]


def _clean(obj):
    """Make a report JSON-safe: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(float(v)) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(u) for u in v)
    return str(v)


def _write_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InvalidInputError(f"cannot parse vector {text!r}") from None


def _load(args) -> tuple[Problem, dict]:
    doc = read_document(args.problem)
    problem = problem_from_dict(doc, epsilon=args.epsilon, theta0=args.theta0,
                                max_iter_factor=args.max_iter_factor)
    return problem, doc


def _x_star(args, problem: Problem, doc: dict):
    text = getattr(args, "x_star", None)
    if text and text != "auto":
        return _parse_vector(text)
    if text is None and "x_star" in doc:
        return np.asarray(doc["x_star"], dtype=float)
    try:
        return grid_minimize(problem.objective, problem.prox.feasible_set, problem.constraints)
    except UnsupportedError:
        return None


# each command returns (report body, rows for CSV, CSV columns, checks passed)

def cmd_solve(args):
    problem, _ = _load(args)
    rep = solve(problem)
    steps = [r.to_record() for r in rep.state.step_log]
    criterion = rep.stop_reason is StopReason.CRITERION_MET
    checks = {
        "stopped_on_criterion": rep.stop_reason is not StopReason.SAFETY_CAP,
        "within_iteration_bound": (rep.iterations_used <= rep.iteration_bound) if criterion else None,
    }
    body = {
        "stop_reason": rep.stop_reason.value,
        "iterations_used": rep.iterations_used,
        "iteration_bound": rep.iteration_bound,
        "safety_cap": rep.safety_cap,
        "best_productive_point": rep.best_productive_point,
        "best_productive_value": rep.best_productive_value,
        "productive_steps": len(rep.state.productive_set),
        "diagnostics": rep.diagnostics,
        "checks": checks,
        "steps": steps,
    }
    return body, steps, STEP_COLUMNS, all(v is not False for v in checks.values())


def cmd_certify(args):
    problem, doc = _load(args)
    rep = solve(problem)
    x_star = _x_star(args, problem, doc)
    cert = certify_run(rep, problem, x_star=x_star, L=args.L, delta=args.delta)
    body = cert.to_record() | {"x_star": x_star}
    rows = [{"field": k, "value": _clean(v)} for k, v in sorted(body.items())]
    return body, rows, ["field", "value"], cert.all_hold


def _segment_pairs(problem: Problem, count: int, seed: int):
    rng = np.random.default_rng(seed)
    fs = problem.prox.feasible_set
    lo, hi = fs.bounding_box()
    toward = isinstance(problem.objective, Example1Lifted)
    pairs = sample_segments(rng, lo, hi, count, toward_upper=toward)
    if isinstance(fs, Box):
        return pairs
    return [(fs.project(a), fs.project(b)) for a, b in pairs]


def cmd_interp_check(args):
    problem, _ = _load(args)
    f = problem.objective
    L = f.lipschitz_grad if args.L is None else args.L
    delta = f.delta if args.delta is None else args.delta
    if args.segments < 1:
        raise InvalidInputError("--segments must be at least 1")
    rows = []
    for i, (x, y) in enumerate(_segment_pairs(problem, args.segments, args.seed)):
        rep = check_interpolation(f, x, y, L, delta, problem.prox.norm)
        rows.append({"index": i, "x": [float(v) for v in x], "y": [float(v) for v in y]}
                    | rep.to_record())
    failures = sum(not r["holds"] for r in rows)
    body = {
        "L": L,
        "delta": delta,
        "seed": args.seed,
        "segments": len(rows),
        "failures": failures,
        "max_residual": max(r["residual"] for r in rows),
        "records": rows,
    }
    cols = ["index", "x", "y", "residual", "lhs", "rhs", "holds", "chosen_subgradient"]
    return body, rows, cols, failures == 0


def _bench_point(problem: Problem, eps: float) -> dict:
    p = Problem(problem.objective, problem.constraints, problem.prox, eps, problem.theta0,
                max_iterations=problem.max_iterations, max_iter_factor=problem.max_iter_factor)
    rep = solve(p)
    return {
        "epsilon": eps,
        "theta0": p.theta0,
        "M_g": p.M_g,
        "stop_reason": rep.stop_reason.value,
        "iterations_used": rep.iterations_used,
        "iteration_bound": rep.iteration_bound,
        "productive_steps": len(rep.state.productive_set),
        "within_bound": rep.stop_reason is StopReason.CRITERION_MET
        and rep.iterations_used <= rep.iteration_bound,
    }


def cmd_bench(args):
    eps_list = BENCH_EPSILONS if args.eps_list is None else tuple(_parse_vector(args.eps_list))
    if args.builtin:
        if args.builtin not in BENCHMARKS:
            raise InvalidInputError(f"unknown benchmark {args.builtin!r}; choose from {sorted(BENCHMARKS)}")
        make = BENCHMARKS[args.builtin]
        base = make(eps_list[0]).problem
        if args.theta0 is not None:
            base.theta0 = args.theta0
        base.max_iter_factor = args.max_iter_factor
    elif args.problem:
        base, _ = _load(args)
    else:
        raise InvalidInputError("bench needs a problem file or --builtin")
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda e: _bench_point(base, float(e)), eps_list))
    body = {"benchmark": args.builtin, "records": rows}
    cols = list(rows[0].keys())
    return body, rows, cols, all(r["within_bound"] for r in rows)


COMMANDS = {"solve": cmd_solve, "certify": cmd_certify, "interp-check": cmd_interp_check,
            "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcmirror",
                                     description="Adaptive mirror descent for quasiconvex problems.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=float, default=None, help="override the file's epsilon")
    common.add_argument("--theta0", type=float, default=None, help="override the file's theta0")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    common.add_argument("--max-iter-factor", type=float, default=10.0,
                        help="safety cap as a multiple of the iteration bound")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="run the solver and emit the step log")
    p.add_argument("problem")

    p = sub.add_parser("certify", parents=[common], help="solve and check the accuracy certificate")
    p.add_argument("problem")
    p.add_argument("--x-star", default=None, help="'auto' or comma-separated coordinates")
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)

    p = sub.add_parser("interp-check", parents=[common], help="check the interpolation inequality")
    p.add_argument("problem")
    p.add_argument("--segments", type=int, default=1000)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)

    p = sub.add_parser("bench", parents=[common], help="iteration counts over an epsilon sweep")
    p.add_argument("problem", nargs="?")
    p.add_argument("--builtin", choices=sorted(BENCHMARKS), default=None)
    p.add_argument("--eps-list", default=None, help="comma-separated epsilons")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        body, rows, cols, ok = COMMANDS[args.command](args)
    except (ProblemFormatError, InvalidInputError, UnsupportedError) as exc:
        record = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
        return EXIT_INPUT_ERROR
    status = EXIT_OK if ok else EXIT_CHECK_FAILED
    if args.format == "csv":
        text = _write_csv(rows, cols)
    else:
        doc = {
            "command": args.command,
            "problem_file": getattr(args, "problem", None),
            "seed": args.seed,
            "exit_status": status,
            "result": body,
        }
        if not args.no_timestamp:
            doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        text = json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
