import csv
import io

import numpy as np

from cwcsim.engine import EnsembleSeries, Trajectory
from cwcsim.monitors import (
    Monitor,
    evaluate_monitor,
    evaluate_monitors,
    write_ensemble_csv,
    write_run_csv,
)
from cwcsim.surface import parse_term_text
from cwcsim.terms import Compartment, Coordinate, Term


def cell(label, r, c, text):
    return Compartment(label, Term(((Coordinate(r, c), 1),)), parse_term_text(text))


def system(*cells):
    return Compartment("top", Term(), Term((c, 1) for c in cells))


def pat(text):
    return parse_term_text(text, "pattern")


def test_explicit_monitor_counts_pattern_matches():
    root = system(cell("soil", 1, 1, "Root 3 Hyp"))
    m = Monitor("hyp@1,1", Coordinate(1, 1), "soil", pat("Hyp"))
    assert evaluate_monitor(m, root) == 3.0


def test_monitor_on_empty_cell_is_zero():
    root = system(cell("soil", 1, 1, "\\e"))
    m = Monitor("hyp@1,1", Coordinate(1, 1), "soil", pat("Hyp"))
    assert evaluate_monitor(m, root) == 0.0


def test_monitor_label_mismatch_is_zero():
    root = system(cell("water", 1, 1, "3 Hyp"))
    m = Monitor("hyp@1,1", Coordinate(1, 1), "soil", pat("Hyp"))
    assert evaluate_monitor(m, root) == 0.0


def test_whole_grid_average():
    cells = [cell("soil", 1, c, "Hyp") for c in range(1, 14)]
    root = system(*cells)
    avg = Monitor("hyp", None, "soil", pat("Hyp"))
    assert evaluate_monitor(avg, root) == 1.0


def test_average_equals_mean_of_per_cell_monitors():
    cells = [cell("soil", 1, 1, "4 Hyp"), cell("soil", 1, 2, "Hyp"), cell("water", 1, 3, "9 Hyp")]
    root = system(*cells)
    avg = Monitor("hyp", None, "soil", pat("Hyp"))
    per_cell = [
        Monitor("m", Coordinate(1, c), "soil", pat("Hyp")) for c in (1, 2)
    ]
    values = [evaluate_monitor(m, root) for m in per_cell]
    assert evaluate_monitor(avg, root) == sum(values) / len(values) == 2.5


def test_evaluate_monitors_matches_individual_calls():
    root = system(cell("soil", 1, 1, "2 Tip Hyp"), cell("soil", 1, 2, "Tip"))
    monitors = [
        Monitor("tip@1,1", Coordinate(1, 1), "soil", pat("Tip")),
        Monitor("pair@1,1", Coordinate(1, 1), "soil", pat("2 Tip")),
        Monitor("tip", None, "soil", pat("Tip")),
    ]
    assert evaluate_monitors(monitors, root) == [
        evaluate_monitor(m, root) for m in monitors
    ] == [2.0, 1.0, 1.5]


def test_run_csv_format(tmp_path):
    traj = Trajectory(
        ["hyp@1,1", "tip"],
        np.array([0.0, 0.5]),
        np.array([[3.0, 1.0], [2.0, 0.5]]),
    )
    path = tmp_path / "out.csv"
    write_run_csv(traj, str(path))
    data = path.read_bytes().decode()
    assert "\r" not in data
    rows = list(csv.reader(io.StringIO(data)))
    assert rows[0] == ["time", "hyp@1,1", "tip"]
    assert rows[1] == ["0.0", "3.0", "1.0"]
    # values round-trip bitwise through the decimal form
    assert float(rows[2][2]) == 0.5


def test_header_only_trajectory(tmp_path):
    traj = Trajectory(["a"], np.empty(0), np.empty((0, 1)))
    path = tmp_path / "empty.csv"
    write_run_csv(traj, str(path))
    assert path.read_text() == "time,a\n"


def test_ensemble_csv_format(tmp_path):
    series = EnsembleSeries(
        ["hyp@1,1"],
        np.array([0.0, 1.0]),
        np.array([[3.0], [2.25]]),
        np.array([[0.0], [0.7071067811865476]]),
    )
    path = tmp_path / "ens.csv"
    write_ensemble_csv(series, str(path))
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["time", "hyp@1,1_mean", "hyp@1,1_std"]
    assert rows[1] == ["0.0", "3.0", "0.0"]
    assert float(rows[2][2]) == 0.7071067811865476


def test_row_count_for_horizon_and_interval(tmp_path):
    from cwcsim.engine import sample_times

    times = sample_times(10.0, 0.1)
    traj = Trajectory(["a"], times, np.zeros((len(times), 1)))
    path = tmp_path / "rows.csv"
    write_run_csv(traj, str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + 101
