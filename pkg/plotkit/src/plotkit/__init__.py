"""Render ensemble CSV files into mean-versus-time figures.

The input format is the simulator's ensemble CSV: a `time` column
followed by `<monitor>_mean` and `<monitor>_std` column pairs.  One line
is drawn per monitor whose name starts with the selected prefix; the
legend shows the part of the name after the prefix (for per-cell
monitors like `hyp@1,7` that is the cell coordinate).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__version__ = "0.1.0"
__all__ = ["PlotSpec", "PlotError", "read_ensemble", "plot_ensemble", "main"]


class PlotError(ValueError):
    """Malformed or empty input CSV, or no columns match the prefix."""


@dataclass
class PlotSpec:
    csv_path: str
    prefix: str = "hyp@"
    out_path: str = "fig.png"
    xlabel: str = "time"
    ylabel: str = "mean count"
    title: Optional[str] = None


def read_ensemble(path: str) -> Tuple[List[float], Dict[str, List[float]]]:
    """Times and per-monitor mean series from an ensemble CSV.

    Raises PlotError on a missing header, a header-only file, or rows of
    the wrong width; `_std` columns are read past but not returned.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotError(f"{path}: empty file")
        if not header or header[0] != "time":
            raise PlotError(f"{path}: expected a 'time' column first, got {header[:1]}")
        mean_cols = [
            (i, name[: -len("_mean")])
            for i, name in enumerate(header)
            if name.endswith("_mean")
        ]
        times: List[float] = []
        series: Dict[str, List[float]] = {name: [] for _i, name in mean_cols}
        for row in reader:
            if len(row) != len(header):
                raise PlotError(f"{path}: row width {len(row)} != header width {len(header)}")
            times.append(float(row[0]))
            for i, name in mean_cols:
                series[name].append(float(row[i]))
    if not times:
        raise PlotError(f"{path}: no data rows")
    return times, series


def plot_ensemble(spec: PlotSpec):
    """Draw the selected series and save the figure; returns the Figure."""
    times, series = read_ensemble(spec.csv_path)
    selected = {
        name: values for name, values in series.items() if name.startswith(spec.prefix)
    }
    if not selected:
        raise PlotError(
            f"{spec.csv_path}: no mean columns start with {spec.prefix!r} "
            f"(available: {', '.join(sorted(series)) or 'none'})"
        )
    fig, ax = plt.subplots(figsize=(8, 5))
    for name in sorted(selected):
        ax.plot(times, selected[name], label=name[len(spec.prefix):])
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(title=spec.prefix.rstrip("@"), fontsize="small", ncol=2)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    return fig


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_ensemble",
        description="Plot mean time series from an ensemble CSV, one line per monitor.",
    )
    parser.add_argument("csv", help="ensemble CSV file")
    parser.add_argument("--prefix", default="hyp@", help="monitor name prefix to select")
    parser.add_argument("--out", default="fig.png", help="output image path")
    parser.add_argument("--xlabel", default="time")
    parser.add_argument("--ylabel", default="mean count")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    spec = PlotSpec(args.csv, args.prefix, args.out, args.xlabel, args.ylabel, args.title)
    try:
        fig = plot_ensemble(spec)
    except (OSError, PlotError) as exc:
        print(f"plot_ensemble: {exc}", file=sys.stderr)
        return 1
    plt.close(fig)
    print(f"wrote {spec.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
