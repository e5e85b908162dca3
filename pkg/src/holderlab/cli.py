"""Command-line driver: ``holderlab list | run <check_id> | run-all``.

Exit status is 0 when no check fails, 1 when any check fails, 2 on usage
or configuration errors and 3 on an unexpected internal error.
Inconclusive checks (quadrature that did not reach its tolerance) do not
change the exit status.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import traceback
from pathlib import Path

from . import __version__
from .checks import REGISTRY, Context
from .config import load_config, quadrature_config
from .errors import DomainError, QuadratureError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _jsonable(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    try:
        x = float(value)
    except (TypeError, ValueError):
        return str(value)
    return x if math.isfinite(x) else str(x)


def run_check(check_id: str, config: dict, seed: int | None = None):
    """Run one registered check; returns ``(report, tables)``."""
    if check_id not in REGISTRY:
        raise UsageError(f"unknown check {check_id!r}; see `holderlab list`")
    seed = int(config.get("seed", 0) if seed is None else seed)
    ctx = Context(config, seed)
    start = time.perf_counter()
    tables = []
    try:
        outcome = REGISTRY[check_id].run(ctx)
        status = "pass" if outcome.passed else "fail"
        measured, expected, tables = outcome.measured, outcome.expected, outcome.tables
        diagnostics = [f"failed: {name}" for name in outcome.failures] + outcome.notes
    except QuadratureError as exc:
        status = "inconclusive"
        measured, expected = [], []
        partial = getattr(exc.partial, "value", exc.partial)
        if partial is not None:
            measured = [("partial_estimate", partial)]
        diagnostics = [str(exc)]
    elapsed = (time.perf_counter() - start) * 1000.0
    report = {
        "check_id": check_id,
        "status": status,
        "measured": [{"name": n, "value": _jsonable(v)} for n, v in measured],
        "expected": [{"name": n, "value": _jsonable(v), "provenance": p} for n, v, p in expected],
        "runtime_ms": round(elapsed, 3),
        "seed": seed,
        "tool_version": __version__,
        "diagnostics": diagnostics,
    }
    return report, tables


def selected_checks(config: dict):
    include = config.get("checks", {}).get("include", "all")
    if include == "all":
        return list(REGISTRY)
    if isinstance(include, str):
        include = [include]
    unknown = [c for c in include if c not in REGISTRY]
    if unknown:
        raise UsageError(f"unknown checks in configuration: {', '.join(unknown)}")
    return list(include)


def write_outputs(report, tables, out: Path, with_csv: bool, plots: bool):
    out.mkdir(parents=True, exist_ok=True)
    cid = report["check_id"]
    (out / f"{cid}.json").write_text(json.dumps(report, indent=2) + "\n")
    if not with_csv:
        return
    for table in tables:
        path = out / f"{cid}__{table.name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(table.columns)
            writer.writerows(table.rows)
        if plots:
            from .plotting import render_table

            render_table(table, path.with_suffix(".png"))


def _print_line(report):
    print(f"{report['status'].upper():<13} {report['check_id']:<26} {report['runtime_ms']:>10.1f} ms")


def build_parser():
    parser = argparse.ArgumentParser(prog="holderlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML file layered over the built-in defaults")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--out", type=Path, default=Path("reports"), help="output directory (default: reports)")
    common.add_argument("--csv", action="store_true", help="also write sweep tables as CSV with PNG figures")
    common.add_argument("--no-plots", action="store_true", help="with --csv, skip the figures")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. quadrature.rel_tol=1e-12 (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered checks")
    run = sub.add_parser("run", parents=[common], help="run one check")
    run.add_argument("check_id")
    sub.add_parser("run-all", parents=[common], help="run every selected check")
    return parser


def _load(args):
    if args.config is not None and not args.config.is_file():
        raise UsageError(f"config file {args.config} not found")
    overrides = list(args.overrides)
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        overrides.append(f"seed={args.seed}")
    try:
        config = load_config(args.config, overrides)
        quadrature_config(config)
    except (DomainError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "list":
            for cid, check in REGISTRY.items():
                print(f"{cid:<26} {check.summary}")
            return EXIT_OK
        config = _load(args)
        ids = [args.check_id] if args.command == "run" else selected_checks(config)
        if args.command == "run" and args.check_id not in REGISTRY:
            raise UsageError(f"unknown check {args.check_id!r}; see `holderlab list`")
        reports = []
        for cid in ids:
            report, tables = run_check(cid, config)
            write_outputs(report, tables, args.out, args.csv, not args.no_plots)
            _print_line(report)
            reports.append(report)
        if args.command == "run-all":
            counts = {s: sum(1 for r in reports if r["status"] == s) for s in ("pass", "fail", "inconclusive")}
            summary = {"tool_version": __version__, "seed": int(config["seed"]), "counts": counts,
                       "checks": [{"check_id": r["check_id"], "status": r["status"]} for r in reports]}
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
            print(f"{counts['pass']} passed, {counts['fail']} failed, {counts['inconclusive']} inconclusive")
        return EXIT_FAIL if any(r["status"] == "fail" for r in reports) else EXIT_OK
    except UsageError as exc:
        print(f"holderlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
