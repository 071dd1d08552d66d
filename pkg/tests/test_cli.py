import os

import pytest

from conftest import model_path
from cwcsim.cli import main

DECAY = """
model decay ;
grid 1 , 1 ;
se {s} a [0.1] \\e ;
cell <1,1> {s} 100 a ;
monitor a {s} a ;
"""


@pytest.fixture
def decay_model(tmp_path):
    path = tmp_path / "decay.cwc"
    path.write_text(DECAY)
    return str(path)


def test_validate_bundled_models(capsys):
    for name in ("am_calospora.cwc", "am_glomus.cwc", "river.cwc"):
        assert main(["validate", model_path(name)]) == 0
    out = capsys.readouterr().out
    assert "ok" in out


def test_validate_reports_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.cwc"
    bad.write_text("model M ; grid 2 2 ;")
    assert main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.cwc:1:" in err


def test_validate_reports_coverage_gap(tmp_path, capsys):
    gap = tmp_path / "gap.cwc"
    gap.write_text("model M ; grid 2 , 2 ; cell <1,1> {s} \\e ;")
    assert main(["validate", str(gap)]) == 2
    assert "not covered" in capsys.readouterr().err


def test_missing_file_is_a_load_error(capsys):
    assert main(["validate", "/nonexistent/model.cwc"]) == 2


def test_usage_errors(decay_model, capsys):
    assert main(["frobnicate"]) == 1
    assert main(["run", decay_model]) == 1  # --horizon is required
    assert main(["run", decay_model, "--horizon", "1", "--runs", "0"]) == 1
    assert main(["run", decay_model, "--horizon", "-1"]) == 1


def test_compile_emit_ground(decay_model, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["compile", decay_model, "--emit-ground", "-o", str(out)]) == 0
    text = (out / "decay.ground").read_text()
    assert text.startswith("cwc-ground v1\n")


def test_run_writes_all_csvs(decay_model, tmp_path, capsys):
    out = tmp_path / "res"
    rc = main([
        "run", decay_model, "--runs", "3", "--horizon", "2",
        "--interval", "0.5", "--seed", "1", "-o", str(out),
    ])
    assert rc == 0
    files = sorted(os.listdir(out))
    assert files == [
        "decay_ensemble.csv", "decay_run0.csv", "decay_run1.csv", "decay_run2.csv"
    ]
    header = (out / "decay_ensemble.csv").read_text().splitlines()[0]
    assert header == "time,a_mean,a_std"


def test_run_is_deterministic(decay_model, tmp_path, capsys):
    outs = []
    for sub in ("r1", "r2"):
        out = tmp_path / sub
        assert main([
            "run", decay_model, "--runs", "4", "--horizon", "2",
            "--seed", "9", "-o", str(out),
        ]) == 0
        outs.append({
            name: (out / name).read_bytes() for name in os.listdir(out)
        })
    assert outs[0] == outs[1]


def test_default_interval_is_horizon_over_hundred(decay_model, tmp_path, capsys):
    out = tmp_path / "d"
    assert main(["run", decay_model, "--horizon", "10", "-o", str(out)]) == 0
    lines = (out / "decay_ensemble.csv").read_text().splitlines()
    assert len(lines) == 1 + 101
