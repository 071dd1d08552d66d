import csv
import time

import pytest

from plotkit import PlotError, PlotSpec, main, plot_ensemble, read_ensemble


def write_ensemble_csv(path, monitors, rows):
    """rows: list of (time, {monitor: mean}); std columns are zero-filled."""
    header = ["time"]
    for m in monitors:
        header += [f"{m}_mean", f"{m}_std"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, means in rows:
            row = [repr(float(t))]
            for m in monitors:
                row += [repr(float(means[m])), "0.0"]
            writer.writerow(row)


@pytest.fixture
def am_csv(tmp_path):
    # the 1x13 strip layout: one hyp monitor per cell plus an unrelated tip one
    monitors = [f"hyp@1,{c}" for c in range(1, 14)] + ["tip@1,1"]
    rows = [
        (t, {m: (20.0 - i) * t for i, m in enumerate(monitors)})
        for t in (0.0, 0.5, 1.0)
    ]
    path = tmp_path / "am_ensemble.csv"
    write_ensemble_csv(path, monitors, rows)
    return str(path)


def test_read_ensemble_returns_mean_series(am_csv):
    times, series = read_ensemble(am_csv)
    assert times == [0.0, 0.5, 1.0]
    assert len(series) == 14
    assert series["hyp@1,1"] == [0.0, 10.0, 20.0]


def test_thirteen_line_figure_from_am_ensemble(am_csv, tmp_path):
    start = time.monotonic()
    out = tmp_path / "fig.png"
    fig = plot_ensemble(PlotSpec(am_csv, prefix="hyp@", out_path=str(out)))
    assert len(fig.axes[0].lines) == 13
    assert out.stat().st_size > 0
    assert time.monotonic() - start < 10.0


def test_header_only_csv_errors(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("time,hyp@1,1_mean,hyp@1,1_std\n")
    with pytest.raises(PlotError):
        read_ensemble(str(path))
    assert main([str(path), "--out", str(tmp_path / "fig.png")]) != 0
    assert "no data rows" in capsys.readouterr().err


def test_missing_prefix_columns_error(am_csv, tmp_path, capsys):
    assert main([am_csv, "--prefix", "nope@", "--out", str(tmp_path / "f.png")]) != 0
    assert "no mean columns" in capsys.readouterr().err


def test_missing_file_errors(tmp_path, capsys):
    assert main([str(tmp_path / "absent.csv")]) != 0


def test_cli_writes_image(am_csv, tmp_path, capsys):
    out = tmp_path / "cli.png"
    assert main([am_csv, "--prefix", "hyp@", "--out", str(out)]) == 0
    assert out.exists()


def test_legend_labels_strip_prefix(am_csv, tmp_path):
    fig = plot_ensemble(PlotSpec(am_csv, prefix="hyp@", out_path=str(tmp_path / "f.png")))
    labels = [line.get_label() for line in fig.axes[0].lines]
    assert labels[0] == "1,1"
    assert "1,13" in labels
