"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 boundary-degenerate parameters,
3 a verification check failed (or the classifier contradicted itself).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import BoundaryDegenerate, GameError, InconsistentClassification
from .exogenous import solve_exogenous_fne, solve_exogenous_olne
from .fne import classify_fne_regime, solve_endogenous_fne
from .olne import classify_olne_regime, solve_endogenous_olne
from .serialization import alpha2_band_csv, dumps, load_config, solution_document
from .verification import check_solution_document, compare_equilibria, qvi_residual_scan, run_suite

EXIT_OK, EXIT_INVALID, EXIT_BOUNDARY, EXIT_CHECK = 0, 1, 2, 3
MAX_RESOLUTION = 2000
SOLVE_MODES = ("exogenous-olne", "exogenous-fne", "olne", "fne")


class UsageError(GameError):
    pass


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def solve(mode: str, p, instants):
    if mode == "exogenous-olne":
        return solve_exogenous_olne(p, instants)
    if mode == "exogenous-fne":
        return solve_exogenous_fne(p, instants)
    if instants:
        raise UsageError(f"mode {mode} computes its own instants; remove 'instants' from the config")
    if mode == "olne":
        return solve_endogenous_olne(p)
    if mode == "fne":
        return solve_endogenous_fne(p)
    raise UsageError(f"unknown mode {mode!r}")


def cmd_solve(args) -> int:
    p, instants = load_config(args.config)
    sol = solve(args.mode, p, instants)
    _write(args.out, dumps(solution_document(sol, args.mode)))
    if args.trajectory:
        Path(args.trajectory).write_text(sol.trajectory.to_csv())
    if args.alpha2_bands:
        if args.mode != "fne":
            raise UsageError("--alpha2-bands needs --mode fne")
        Path(args.alpha2_bands).write_text(alpha2_band_csv(sol))
    return EXIT_OK


def cmd_simulate(args) -> int:
    p, instants = load_config(args.config)
    sol = solve(args.mode, p, instants)
    _write(args.out, sol.trajectory.to_csv())
    return EXIT_OK


def cmd_classify(args) -> int:
    p, _ = load_config(args.config)
    regime = classify_olne_regime(p) if args.mode == "olne" else classify_fne_regime(p)
    _write(args.out, dumps({"mode": args.mode, **regime.to_dict()}))
    return EXIT_OK


def parse_range(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range {text!r} is not min:max:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"range {text!r} is not min:max:n") from exc
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
        raise UsageError(f"range {text!r} needs finite min <= max")
    if not 0 <= n <= MAX_RESOLUTION:
        raise UsageError(f"resolution {n} outside 0..{MAX_RESOLUTION}")
    return lo, hi, n


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 0 or lo == hi:
        return np.empty(0)
    return np.linspace(lo, hi, n)


def sweep_cell(p, mode: str) -> tuple:
    classify = classify_olne_regime if mode == "olne" else classify_fne_regime
    try:
        regime = classify(p)
    except BoundaryDegenerate:
        return "boundary", -1
    return regime.label, regime.k


def sweep_rows(p, mode: str, w2_axis, s2_axis):
    for w2 in w2_axis:
        for s2 in s2_axis:
            label, k = sweep_cell(p.replace(w2=float(w2), s2=float(s2)), mode)
            yield float(w2), float(s2), label, k


def cmd_sweep(args) -> int:
    p, _ = load_config(args.config)
    w2_axis = _axis(*parse_range(args.w2))
    s2_axis = _axis(*parse_range(args.s2))
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["w2", "s2", "regime_label", "k"])
        for w2, s2, label, k in sweep_rows(p, args.mode, w2_axis, s2_axis):
            w.writerow([repr(w2), repr(s2), label, k])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_verify(args) -> int:
    p, instants = load_config(args.config)
    checks = run_suite(p, args.suite, args.seed, instants or None)
    if args.solution:
        try:
            doc = json.loads(Path(args.solution).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"solution file is not valid JSON: {exc}") from exc
        checks += check_solution_document(p, doc)
    failed = [c.name for c in checks if not c.passed and not c.diagnostic]
    summary = {"suite": args.suite, "seed": args.seed, "passed": not failed,
               "failed": failed, "checks": [c.to_dict() for c in checks]}
    _write(args.out, dumps(summary))
    for name in failed:
        print(f"check failed: {name}", file=sys.stderr)
    return EXIT_CHECK if failed else EXIT_OK


def cmd_compare(args) -> int:
    p, instants = load_config(args.config)
    _write(args.out, dumps(compare_equilibria(p, instants or None)))
    return EXIT_OK


def cmd_qvi(args) -> int:
    p, _ = load_config(args.config)
    sol = solve_endogenous_fne(p)
    t_grid = np.linspace(0.0, p.T, args.n_t)
    x_grid = np.linspace(args.x_min, args.x_max, args.n_x)
    report = qvi_residual_scan(p, sol, t_grid, x_grid)
    _write(args.out, report.to_csv())
    for t, x, kind, value in report.violations[:20]:
        print(f"violation {kind} at t={t:.6g}, x={x:.6g}: {value:.3e}", file=sys.stderr)
    if len(report.violations) > 20:
        print(f"... {len(report.violations) - 20} more", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impulsegame",
        description="Equilibria of scalar linear-state games with an impulse-control player.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name, help_text, func):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="JSON file with 'params' and optional 'instants'")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = common("solve", "solve one equilibrium and write it as JSON", cmd_solve)
    sp.add_argument("--mode", required=True, choices=SOLVE_MODES)
    sp.add_argument("--trajectory", default=None, help="also write the state path as CSV")
    sp.add_argument("--alpha2-bands", default=None, help="fne only: CSV of alpha2 with +-gamma")

    sp = common("simulate", "write the equilibrium state trajectory as CSV", cmd_simulate)
    sp.add_argument("--mode", required=True, choices=SOLVE_MODES)

    sp = common("classify", "report the regime for one parameter set", cmd_classify)
    sp.add_argument("--mode", required=True, choices=("olne", "fne"))

    sp = common("sweep", "classify every cell of a (w2, s2) grid", cmd_sweep)
    sp.add_argument("--mode", required=True, choices=("olne", "fne"))
    sp.add_argument("--w2", required=True, help="min:max:n")
    sp.add_argument("--s2", required=True, help="min:max:n")

    sp = common("verify", "run the numerical checks", cmd_verify)
    sp.add_argument("--suite", default="all", choices=("all", "olne", "fne", "exogenous"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--solution", default=None, help="exported solution JSON to re-check")

    common("compare", "open-loop vs feedback report", cmd_compare)

    sp = common("qvi", "QVI residual scan of the feedback equilibrium as CSV", cmd_qvi)
    sp.add_argument("--n-t", type=int, default=101)
    sp.add_argument("--n-x", type=int, default=11)
    sp.add_argument("--x-min", type=float, default=-1.0)
    sp.add_argument("--x-max", type=float, default=1.0)
    return parser


def _join_ranges(argv: list) -> list:
    # "--w2 -2:2:5" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        if argv[i] in ("--w2", "--s2") and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_ranges(argv))
    try:
        return args.func(args)
    except BoundaryDegenerate as exc:
        print(f"boundary-degenerate: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except InconsistentClassification as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (GameError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
