"""Monitor evaluation over spatial system states, and CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .matching import MatchCache, Pattern, match_classes
from .terms import Compartment, Coordinate


@dataclass(frozen=True)
class Monitor:
    """An expanded monitor: a named pattern counted in one grid cell
    (coord set) or averaged over all cells carrying `label` (coord None)."""

    name: str
    coord: Optional[Coordinate]
    label: str
    pattern: Pattern


def _cells(root: Compartment) -> Dict[Coordinate, Compartment]:
    cells: Dict[Coordinate, Compartment] = {}
    for e, _n in root.content.items:
        if isinstance(e, Compartment):
            coord = e.coordinate()
            if coord is not None:
                cells[coord] = e
    return cells


def _count(pattern: Pattern, comp: Compartment, cache: Optional[MatchCache]) -> int:
    return sum(mc.weight for mc in match_classes(pattern, comp.content, cache))


def evaluate_monitor(
    m: Monitor, root: Compartment, cache: Optional[MatchCache] = None
) -> float:
    """Match count of the monitor pattern in its target cell, or the mean of
    per-cell counts over all cells with the monitor's label."""
    cells = _cells(root)
    if m.coord is not None:
        comp = cells.get(m.coord)
        if comp is None or comp.label != m.label:
            return 0.0
        return float(_count(m.pattern, comp, cache))
    counts = [
        _count(m.pattern, comp, cache) for comp in cells.values() if comp.label == m.label
    ]
    if not counts:
        return 0.0
    return sum(counts) / len(counts)


def evaluate_monitors(
    monitors: Sequence[Monitor], root: Compartment, cache: Optional[MatchCache] = None
) -> List[float]:
    """Evaluate all monitors against one state, sharing the cell index."""
    cells = _cells(root)
    out: List[float] = []
    for m in monitors:
        if m.coord is not None:
            comp = cells.get(m.coord)
            if comp is None or comp.label != m.label:
                out.append(0.0)
            else:
                out.append(float(_count(m.pattern, comp, cache)))
        else:
            counts = [
                _count(m.pattern, comp, cache)
                for comp in cells.values()
                if comp.label == m.label
            ]
            out.append(sum(counts) / len(counts) if counts else 0.0)
    return out


def _fmt(v: float) -> str:
    # shortest decimal that round-trips to the same float
    return repr(float(v))


def write_run_csv(trajectory, path: str) -> None:
    """One row per sample: time,<m1>,<m2>,...  (UTF-8, LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time"] + list(trajectory.monitor_names))
        for t, row in zip(trajectory.times, trajectory.values):
            writer.writerow([_fmt(t)] + [_fmt(v) for v in row])


def write_ensemble_csv(series, path: str) -> None:
    """One row per sample: time,<m1>_mean,<m1>_std,...  (UTF-8, LF line endings)."""
    header = ["time"]
    for name in series.monitor_names:
        header.append(f"{name}_mean")
        header.append(f"{name}_std")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, mean_row, std_row in zip(series.times, series.mean, series.std):
            row = [_fmt(t)]
            for m, s in zip(mean_row, std_row):
                row.append(_fmt(m))
                row.append(_fmt(s))
            writer.writerow(row)
