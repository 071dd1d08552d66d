"""Command line entry point: validate, compile and run surface models.

Exit codes: 0 ok, 1 usage error, 2 parse/validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

from .compiler import CompileError, compile_model, emit_ground_model, validate
from .engine import run_ensemble
from .monitors import write_ensemble_csv, write_run_csv
from .surface import parse_model


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # map argparse failures to exit code 1
        raise UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="cwc",
        description="Grid-based stochastic multiset rewriting: parse, compile, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse and check a model file")
    p_validate.add_argument("input", help="surface model file (.cwc)")

    p_compile = sub.add_parser("compile", help="lower a model to ground rules")
    p_compile.add_argument("input", help="surface model file (.cwc)")
    p_compile.add_argument(
        "--emit-ground", action="store_true", help="write <model>.ground in the output directory"
    )
    p_compile.add_argument("-o", "--out", default=".", help="output directory")

    p_run = sub.add_parser("run", help="simulate an ensemble and write CSVs")
    p_run.add_argument("input", help="surface model file (.cwc)")
    p_run.add_argument("--runs", type=int, default=1, help="number of independent runs")
    p_run.add_argument("--horizon", type=float, required=True, help="simulated time horizon")
    p_run.add_argument(
        "--interval", type=float, default=None, help="sampling interval (default horizon/100)"
    )
    p_run.add_argument("--seed", type=int, default=0, help="base seed for run-seed derivation")
    p_run.add_argument("-o", "--out", default=".", help="output directory")
    return parser


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cwc: cannot read {path}: {exc}", file=sys.stderr)
        return None
    model, diags = parse_model(text)
    for d in diags:
        print(f"{path}:{d}", file=sys.stderr)
    return model


def _validate_cmd(args) -> int:
    model = _load(args.input)
    if model is None:
        return 2
    diags = validate(model)
    for d in diags:
        print(f"{args.input}:{d}", file=sys.stderr)
    if any(d.severity == "error" for d in diags):
        return 2
    print(f"{args.input}: ok ({len(model.rules)} rule declarations, "
          f"{len(model.cells)} cell declarations, {len(model.monitors)} monitors)")
    return 0


def _compile_cmd(args) -> int:
    model = _load(args.input)
    if model is None:
        return 2
    try:
        compiled = compile_model(model)
    except CompileError as exc:
        for d in exc.diagnostics:
            print(f"{args.input}:{d}", file=sys.stderr)
        return 2
    print(
        f"{compiled.name}: {compiled.dims[0]}x{compiled.dims[1]} grid, "
        f"{len(compiled.rules)} ground rules, {len(compiled.monitors)} monitors"
    )
    if args.emit_ground:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{compiled.name}.ground")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(emit_ground_model(compiled))
        print(f"wrote {path}")
    return 0


def _run_cmd(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if args.horizon <= 0:
        raise UsageError("--horizon must be positive")
    interval = args.interval if args.interval is not None else args.horizon / 100.0
    if interval <= 0:
        raise UsageError("--interval must be positive")
    if args.seed < 0:
        raise UsageError("--seed must be nonnegative")

    model = _load(args.input)
    if model is None:
        return 2
    try:
        compiled = compile_model(model)
    except CompileError as exc:
        for d in exc.diagnostics:
            print(f"{args.input}:{d}", file=sys.stderr)
        return 2

    try:
        series, trajectories = run_ensemble(
            compiled, args.runs, args.horizon, interval, args.seed
        )
        os.makedirs(args.out, exist_ok=True)
        for i, traj in enumerate(trajectories):
            write_run_csv(traj, os.path.join(args.out, f"{compiled.name}_run{i}.csv"))
        ensemble_path = os.path.join(args.out, f"{compiled.name}_ensemble.csv")
        write_ensemble_csv(series, ensemble_path)
    except Exception as exc:
        print(f"cwc: simulation failed: {exc}", file=sys.stderr)
        return 3
    print(
        f"{compiled.name}: {args.runs} runs to t={args.horizon} "
        f"(interval {interval}, seed {args.seed}); wrote {ensemble_path}"
    )
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "validate":
            return _validate_cmd(args)
        if args.command == "compile":
            return _compile_cmd(args)
        return _run_cmd(args)
    except UsageError as exc:
        print(f"cwc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
