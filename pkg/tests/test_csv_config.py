import json

import pytest
from hypothesis import given, strategies as st

from oclab import csvio
from oclab.config import OUT_ENV, load_config, sweep_from_config
from oclab.csvio import MissingDataError, read_runs_csv, write_csv
from oclab.experiments import Cell, SweepSpec, run_sweep
from oclab.model import ConfigError, ModelParams, PopulationMix, mix_general


@pytest.fixture(scope="module")
def table():
    base = ModelParams(n_agents=30, n_goods=5, horizon=60, warmup=20)
    cells = [Cell(7, mix_general(), {"rivalry": 0.3}), Cell(9, PopulationMix(1.0, 0.0, 0.0))]
    return run_sweep(SweepSpec("demo", base, cells, reps=3))


@given(st.floats(allow_nan=False, allow_infinity=True))
def test_metric_format_round_trip(x):
    assert csvio.quantize(csvio.quantize(x)) == csvio.quantize(x)
    if x == float("inf"):
        assert csvio.fmt_metric(x) == ""


def test_csv_round_trip(tmp_path, table):
    runs, summary = write_csv(table, tmp_path)
    assert runs.name == "demo_runs.csv" and summary.name == "demo_summary.csv"
    header = runs.read_text().splitlines()[0]
    assert header == ",".join(csvio.RUN_HEADER)
    back = read_runs_csv(runs, base=table.rows[0].params)
    assert back.name == "demo"
    assert [(r.cell_id, r.seed, r.mix) for r in back.rows] == [(r.cell_id, r.seed, r.mix) for r in table.rows]
    assert back.rows == csvio.quantized(table).rows
    # re-writing from the read-back table reproduces both files exactly
    before = runs.read_bytes(), summary.read_bytes()
    write_csv(back, tmp_path)
    assert (runs.read_bytes(), summary.read_bytes()) == before


def test_mix_echo_is_lossless(tmp_path, table):
    runs, _ = write_csv(table, tmp_path)
    back = read_runs_csv(runs)
    assert back.rows[0].mix == mix_general()


def test_summary_file(tmp_path, table):
    _, summary = write_csv(table, tmp_path)
    lines = summary.read_text().splitlines()
    assert lines[0] == ",".join(csvio.SUMMARY_HEADER)
    assert len(lines) == 3
    assert lines[1].startswith("7,") and lines[1].endswith(",3")


def test_read_errors(tmp_path):
    with pytest.raises(MissingDataError):
        read_runs_csv(tmp_path / "nope_runs.csv")
    bad = tmp_path / "bad_runs.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_runs_csv(bad)


def test_config_defaults(monkeypatch):
    monkeypatch.delenv(OUT_ENV, raising=False)
    cfg = load_config()
    assert cfg.params == ModelParams() and cfg.reps == 30 and cfg.out == "oclab_out"


def test_config_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"rivalry": 0.5, "heterogeneity": 0.25, "reps": 4,
                                "fig2": {"n_goods": 10}}))
    cfg = load_config(path, {"rivalry": 0.75, "reps": None})
    assert cfg.params.rivalry == 0.75
    assert cfg.params.heterogeneity == 0.25
    assert cfg.reps == 4
    assert cfg.out == str(tmp_path / "env")
    assert cfg.figure_params("fig2").n_goods == 10
    assert cfg.figure_params("fig1").n_goods == 20


@pytest.mark.parametrize("payload,key", [
    ({"rivalry": 1.5}, "rivalry"),
    ({"colour": "red"}, "colour"),
    ({"horizon": 10.5}, "horizon"),
    ({"reps": 1}, "reps"),
    ({"fig3": {"warmup": 5000}}, "warmup"),
    ({"heterogeneity": "high"}, "heterogeneity"),
])
def test_config_errors_name_key(tmp_path, payload, key):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError, match=key):
        load_config(path)


def test_config_unreadable(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    (tmp_path / "x.json").write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "x.json")


def test_sweep_section(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"reps": 2, "sweep": {"name": "mine", "cells": [
        {"id": 1, "mix": "free_riders"}, {"id": 2, "mix": [0.5, 0.5, 0.0], "rivalry": 0.5}]}}))
    spec = sweep_from_config(load_config(path))
    assert spec.name == "mine" and spec.reps == 2
    assert [c.cell_id for c in spec.cells] == [1, 2]
    assert spec.cells[1].params(spec.base_params).rivalry == 0.5
    path.write_text(json.dumps({"sweep": {"cells": [{"id": 1, "mix": "aliens"}]}}))
    with pytest.raises(ConfigError):
        sweep_from_config(load_config(path))
    with pytest.raises(ConfigError, match="sweep"):
        sweep_from_config(load_config())
