"""CSV persistence of sweep results.

Metrics are written with 6 significant digits; parameter echoes use Python's
shortest round-trip float repr so mixes such as 13/96 read back exactly.
Summaries are always computed from the 6-digit values, so re-summarizing a
runs file reproduces the summary file byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import replace
from pathlib import Path

from .experiments import CellSummary, ResultTable, RunRow
from .metrics import MetricsFrame
from .model import ConfigError, ModelParams, PopulationMix

RUN_HEADER = ("cell_id", "pC", "pR", "pF", "rivalry", "heterogeneity", "N", "G", "T", "W",
              "seed", "performance", "efficiency", "gini", "top20_share")
SUMMARY_HEADER = ("cell_id", "pC", "pR", "pF", "rivalry", "heterogeneity", "N", "G", "T", "W",
                  "mean", "ci_lo", "ci_hi", "n")
METRICS = ("performance", "efficiency", "gini", "top20_share")


class MissingDataError(LookupError):
    """Results needed for a figure or report are absent."""


def fmt_metric(x: float) -> str:
    if math.isinf(x):
        return ""
    return f"{x:.6g}"


def parse_metric(s: str) -> float:
    return math.inf if s == "" else float(s)


def quantize(x: float) -> float:
    return parse_metric(fmt_metric(x))


def _param_cols(params: ModelParams, mix: PopulationMix) -> list[str]:
    return [repr(float(v)) for v in mix.as_tuple()] + [
        repr(float(params.rivalry)), repr(float(params.heterogeneity)),
        str(params.n_agents), str(params.n_goods), str(params.horizon), str(params.warmup)]


def quantized(table: ResultTable) -> ResultTable:
    rows = [replace(r, metrics=MetricsFrame(*(quantize(getattr(r.metrics, m)) for m in METRICS)))
            for r in table.rows]
    return ResultTable(table.name, rows)


def _render(header, lines) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(lines)
    return buf.getvalue()


def runs_text(table: ResultTable) -> str:
    return _render(RUN_HEADER, (
        [str(r.cell_id), *_param_cols(r.params, r.mix), str(r.seed),
         *(fmt_metric(getattr(r.metrics, m)) for m in METRICS)]
        for r in table.rows))


def summary_text(summaries: list[CellSummary]) -> str:
    return _render(SUMMARY_HEADER, (
        [str(s.cell_id), *_param_cols(s.params, s.mix),
         fmt_metric(s.mean), fmt_metric(s.ci_lo), fmt_metric(s.ci_hi), str(s.n)]
        for s in summaries))


def write_csv(table: ResultTable, directory: str | Path) -> tuple[Path, Path]:
    """Write ``<name>_runs.csv`` and ``<name>_summary.csv`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    q = quantized(table)
    runs_path = directory / f"{table.name}_runs.csv"
    summary_path = directory / f"{table.name}_summary.csv"
    runs_path.write_text(runs_text(q), encoding="utf-8", newline="")
    summary_path.write_text(summary_text(q.summary()), encoding="utf-8", newline="")
    return runs_path, summary_path


def read_runs_csv(path: str | Path, base: ModelParams | None = None) -> ResultTable:
    """Load a runs file; parameters not echoed in the CSV come from ``base``."""
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"missing results file {path}")
    base = base or ModelParams()
    name = path.name.removesuffix("_runs.csv")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != RUN_HEADER:
            raise ConfigError(f"{path}: unexpected header {header}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(RUN_HEADER):
                raise ConfigError(f"{path}:{lineno}: expected {len(RUN_HEADER)} fields")
            d = dict(zip(RUN_HEADER, rec))
            params = replace(base, rivalry=float(d["rivalry"]), heterogeneity=float(d["heterogeneity"]),
                             n_agents=int(d["N"]), n_goods=int(d["G"]),
                             horizon=int(d["T"]), warmup=int(d["W"]))
            mix = PopulationMix(float(d["pC"]), float(d["pR"]), float(d["pF"]))
            metrics = MetricsFrame(*(parse_metric(d[m]) for m in METRICS))
            rows.append(RunRow(int(d["cell_id"]), params, mix, int(d["seed"]), metrics))
    return ResultTable(name, rows)
