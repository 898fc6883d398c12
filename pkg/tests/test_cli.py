import json
import xml.etree.ElementTree as ET

import pytest

from oclab.cli import EXIT_CONFIG, EXIT_IO, EXIT_MISSING, EXIT_OK, main
from oclab.config import OUT_ENV

SVG = "{http://www.w3.org/2000/svg}"
SMALL = ["--reps", "2", "--set", "n_agents=30", "--set", "horizon=40", "--set", "warmup=10"]


def _classes(path, tag):
    root = ET.parse(path).getroot()
    return [e.get("class", "") for e in root.iter(SVG + tag)]


@pytest.fixture(scope="module")
def figures_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("figs")
    for fig in ("fig1", "fig2", "fig3"):
        assert main([fig, "--out", str(out), *SMALL]) == EXIT_OK
    return out


def test_run_prints_metrics(capsys):
    assert main(["run", "--mix", "free_riders", "--seed", "3"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["seed"] == 3
    assert abs(data["performance"] - 0.05) < 0.01
    assert data["efficiency"] == pytest.approx(5.0)


def test_run_custom_mix(capsys):
    assert main(["run", "--mix", "1,0,0", *SMALL]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["mix"] == [1.0, 0.0, 0.0]


def test_config_errors(tmp_path, caplog):
    assert main(["run", "--set", "rivalry=1.5"]) == EXIT_CONFIG
    assert "rivalry" in caplog.text
    assert main(["run", "--set", "bogus=1"]) == EXIT_CONFIG
    assert main(["run", "--mix", "0.5,0.6,0"]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG
    assert main(["report", "fig9", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_missing_data(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == EXIT_MISSING
    assert main(["report", "fig2", "--out", str(tmp_path)]) == EXIT_MISSING


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["fig1", "--out", str(blocker / "sub"), *SMALL]) == EXIT_IO


def test_outputs_present(figures_dir):
    names = {p.name for p in figures_dir.iterdir()}
    for stem in ("fig1", "fig1_callout", "fig2", "fig3"):
        assert {f"{stem}_runs.csv", f"{stem}_summary.csv"} <= names
    assert {"fig1.svg", "fig2.svg", "fig3.svg", "fig3_tukey.csv"} <= names


def test_fig1_svg(figures_dir):
    path = figures_dir / "fig1.svg"
    groups = _classes(path, "g")
    assert groups.count("star") == 1
    assert "inset" in groups and "marginal-bars" in groups
    assert _classes(path, "rect").count("bar") == 11


def test_fig2_svg(figures_dir):
    path = figures_dir / "fig2.svg"
    root = ET.parse(path).getroot()
    panels = [g.get("id") for g in root.iter(SVG + "g") if g.get("class") == "panel"]
    assert panels == ["panel-A", "panel-B", "panel-C"]
    lines = _classes(path, "g")
    assert lines.count("series h-line") == 3
    assert lines.count("series r-line") == 3
    assert lines.count("series pop-line") == 9
    assert _classes(path, "text").count("footnote") == 1


def test_fig3_svg(figures_dir):
    path = figures_dir / "fig3.svg"
    root = ET.parse(path).getroot()
    cells = [e for e in root.iter(SVG + "rect") if e.get("class") == "cell"]
    assert len(cells) == 121
    assert {int(c.get("data-class")) for c in cells} <= set(range(10))
    assert _classes(path, "g").count("tukey-pair") == 6
    assert len((figures_dir / "fig3_tukey.csv").read_text().splitlines()) == 7


def test_report_is_byte_identical(figures_dir):
    files = sorted(p for p in figures_dir.iterdir() if p.suffix in (".csv", ".svg"))
    before = {p.name: p.read_bytes() for p in files}
    assert main(["report", "--out", str(figures_dir)]) == EXIT_OK
    assert {p.name: p.read_bytes() for p in files} == before


def test_rerun_is_byte_identical(figures_dir, tmp_path):
    assert main(["fig2", "--out", str(tmp_path), "--parallelism", "2", *SMALL]) == EXIT_OK
    for name in ("fig2_runs.csv", "fig2_summary.csv", "fig2.svg"):
        assert (tmp_path / name).read_bytes() == (figures_dir / name).read_bytes()


def test_out_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
    assert main(["fig1", *SMALL]) == EXIT_OK
    assert (tmp_path / "envout" / "fig1.svg").exists()


def test_sweep_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"out": str(tmp_path / "o"), "reps": 2, "horizon": 40, "warmup": 10,
                               "sweep": {"name": "probe", "cells": [{"id": 1}, {"id": 2, "rivalry": 0.0}]}}))
    assert main(["sweep", "--config", str(cfg)]) == EXIT_OK
    runs = tmp_path / "o" / "probe_runs.csv"
    assert len(runs.read_text().splitlines()) == 5
    summary = (tmp_path / "o" / "probe_summary.csv").read_bytes()
    assert main(["report", "fig1", "--out", str(tmp_path / "o")]) == EXIT_MISSING
    assert main(["report", "--table", "probe", "--out", str(tmp_path / "o"), "fig1"]) == EXIT_MISSING
    (tmp_path / "o" / "probe_summary.csv").unlink()
    assert main(["report", "--out", str(tmp_path / "o"), "--table", "probe"]) == EXIT_MISSING
