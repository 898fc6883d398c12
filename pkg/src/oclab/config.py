"""Application configuration: built-in defaults < JSON file < command line."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .experiments import DEFAULT_SEED, Cell, SweepSpec, population_mix
from .model import ConfigError, ModelParams, PopulationMix

OUT_ENV = "OC_LAB_OUT"
DEFAULT_OUT = "oclab_out"
FIGURES = ("fig1", "fig2", "fig3")

_INT_PARAMS = {f.name for f in fields(ModelParams) if f.type in ("int", int)}


@dataclass
class AppConfig:
    params: ModelParams = field(default_factory=ModelParams)
    reps: int = 30
    seed: int = DEFAULT_SEED
    out: str = DEFAULT_OUT
    parallelism: int = 1
    figure_overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    sweep: dict[str, Any] | None = None

    def figure_params(self, figure: str) -> ModelParams:
        return replace(self.params, **self.figure_overrides.get(figure, {}))


def _check_param(key: str, value: Any) -> Any:
    if key not in ModelParams.field_names():
        raise ConfigError(f"unknown key {key!r}")
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if key in _INT_PARAMS:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
    elif isinstance(value, int):
        value = float(value)
    elif not isinstance(value, float):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return value


def _check_params(params: ModelParams, where: str = "") -> ModelParams:
    problems = params.violations()
    if problems:
        raise ConfigError("; ".join(where + p for p in problems))
    return params


def _int_key(key: str, value: Any, lo: int, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < lo or (hi is not None and value >= hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi})"
        raise ConfigError(f"{key}: expected an integer {bound}, got {value!r}")
    return value


def _apply(cfg: AppConfig, values: Mapping[str, Any], source: str) -> AppConfig:
    param_updates = {}
    for key, value in values.items():
        if value is None:
            continue
        if key in ModelParams.field_names():
            param_updates[key] = _check_param(key, value)
        elif key == "reps":
            cfg.reps = _int_key(key, value, 2)
        elif key == "seed":
            cfg.seed = _int_key(key, value, 0, 2**64)
        elif key == "parallelism":
            cfg.parallelism = _int_key(key, value, 1)
        elif key == "out":
            if not isinstance(value, str) or not value:
                raise ConfigError(f"out: expected a path string, got {value!r}")
            cfg.out = value
        elif key in FIGURES:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object of parameter overrides")
            overrides = {k: _check_param(k, v) for k, v in value.items()}
            _check_params(replace(cfg.params, **overrides), f"{key}.")
            cfg.figure_overrides[key] = {**cfg.figure_overrides.get(key, {}), **overrides}
        elif key == "sweep":
            if not isinstance(value, dict):
                raise ConfigError("sweep: expected an object")
            cfg.sweep = value
        else:
            raise ConfigError(f"unknown key {key!r} in {source}")
    cfg.params = _check_params(replace(cfg.params, **param_updates))
    return cfg


def load_config(path: str | Path | None = None, cli_overrides: Mapping[str, Any] | None = None) -> AppConfig:
    """Build the configuration; raises :class:`ConfigError` naming the bad key."""
    cfg = AppConfig(out=os.environ.get(OUT_ENV) or DEFAULT_OUT)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path}: top level must be an object")
        _apply(cfg, data, str(path))
    if cli_overrides:
        _apply(cfg, cli_overrides, "command line")
    return cfg


def _parse_mix(value: Any, where: str) -> PopulationMix:
    if isinstance(value, str):
        return population_mix(value)
    if isinstance(value, dict):
        return PopulationMix(**{k: float(value[k]) for k in ("cooperators", "reciprocators", "free_riders")})
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return PopulationMix(*(float(v) for v in value))
    raise ConfigError(f"{where}: mix must be a population name, [pC, pR, pF] or an object")


def sweep_from_config(cfg: AppConfig) -> SweepSpec:
    """Custom sweep described under the ``sweep`` key.

    ``{"name": "...", "cells": [{"id": 1, "mix": "general", "rivalry": 0.5, ...}]}``;
    every other cell key is a model parameter override.
    """
    if cfg.sweep is None:
        raise ConfigError("sweep: no 'sweep' section in the configuration")
    unknown = set(cfg.sweep) - {"name", "cells"}
    if unknown:
        raise ConfigError(f"sweep: unknown key {sorted(unknown)[0]!r}")
    name = cfg.sweep.get("name", "sweep")
    if not isinstance(name, str) or not name.replace("_", "").replace("-", "").isalnum():
        raise ConfigError("sweep.name: expected a simple file-name-safe string")
    raw_cells = cfg.sweep.get("cells")
    if not isinstance(raw_cells, list) or not raw_cells:
        raise ConfigError("sweep.cells: expected a non-empty list")
    cells = []
    for k, raw in enumerate(raw_cells):
        where = f"sweep.cells[{k}]"
        if not isinstance(raw, dict) or "id" not in raw:
            raise ConfigError(f"{where}: expected an object with an 'id'")
        cid = _int_key(f"{where}.id", raw["id"], 0, 2**32)
        mix = _parse_mix(raw.get("mix", "general"), where)
        overrides = {key: _check_param(key, v) for key, v in raw.items() if key not in ("id", "mix")}
        _check_params(replace(cfg.params, **overrides), f"{where}.")
        cells.append(Cell(cid, mix, overrides))
    return SweepSpec(name, cfg.params, cells, cfg.reps, cfg.seed).validate()
