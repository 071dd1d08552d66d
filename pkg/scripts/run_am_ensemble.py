#!/usr/bin/env python3
"""Run a fungal-growth ensemble and write per-run and ensemble CSVs.

Reproduces the case-study workflow: 60 stochastic runs of the bundled
hyphal growth model on a 1x13 strip, with per-cell hyphae and tip
monitors, averaged into a single ensemble series.

Usage:
    python3 scripts/run_am_ensemble.py [--model models/am_glomus.cwc] [--out results]
"""

import argparse
import os
import sys
from dataclasses import dataclass

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from cwcsim.compiler import compile_model
from cwcsim.engine import run_ensemble
from cwcsim.monitors import write_ensemble_csv, write_run_csv
from cwcsim.surface import parse_model

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))


@dataclass
class ExperimentConfig:
    model_path: str = os.path.join(REPO_ROOT, "models", "am_calospora.cwc")
    out_dir: str = os.path.join(REPO_ROOT, "results")
    runs: int = 60
    horizon: float = 10.0
    interval: float = 0.5
    seed: int = 42


def run(config: ExperimentConfig) -> str:
    with open(config.model_path, encoding="utf-8") as fh:
        model, diags = parse_model(fh.read())
    if model is None:
        for d in diags:
            print(f"{config.model_path}:{d}", file=sys.stderr)
        raise SystemExit(2)
    compiled = compile_model(model)
    series, trajectories = run_ensemble(
        compiled, config.runs, config.horizon, config.interval, config.seed
    )
    os.makedirs(config.out_dir, exist_ok=True)
    for i, traj in enumerate(trajectories):
        write_run_csv(traj, os.path.join(config.out_dir, f"{compiled.name}_run{i}.csv"))
    ensemble_path = os.path.join(config.out_dir, f"{compiled.name}_ensemble.csv")
    write_ensemble_csv(series, ensemble_path)
    return ensemble_path


def main() -> int:
    defaults = ExperimentConfig()
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", default=defaults.model_path)
    parser.add_argument("--out", default=defaults.out_dir)
    parser.add_argument("--runs", type=int, default=defaults.runs)
    parser.add_argument("--horizon", type=float, default=defaults.horizon)
    parser.add_argument("--interval", type=float, default=defaults.interval)
    parser.add_argument("--seed", type=int, default=defaults.seed)
    args = parser.parse_args()
    config = ExperimentConfig(
        args.model, args.out, args.runs, args.horizon, args.interval, args.seed
    )
    path = run(config)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
