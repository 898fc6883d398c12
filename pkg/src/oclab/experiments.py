"""Sweep designs for the three figures and a deterministic sweep runner."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

from . import stats
from .engine import RunResult, parallel_map, run
from .metrics import MetricsFrame
from .model import ConfigError, CooperationType, ModelParams, PopulationMix, mix_general

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
DEFAULT_SEED = 20130601

FIG1_COOPERATOR_LEVELS = (0.0, 0.01, 0.02, 0.05, 0.10, 0.13, 0.15, 0.20, 0.30, 0.50, 0.75, 1.00)
GENERAL_COOPERATOR_SHARE = 0.13
CALLOUT_COOPERATORS = 0.05
CALLOUT_RECIPROCATOR_SHARES = (0.0, 0.25, 0.50, 0.75, 1.0)
FIG2_LEVELS = (0.0, 0.5, 1.0)
FIG3_LEVELS = tuple(round(0.1 * i, 1) for i in range(11))
POPULATIONS = ("cooperators", "general", "reciprocators", "free_riders")

# disjoint id ranges keep seeds distinct across figures
FIG1_BASE_ID, CALLOUT_BASE_ID, FIG2_BASE_ID, FIG3_BASE_ID = 1000, 1100, 2000, 3000


def derive_seed(base: int, cell_id: int, rep: int) -> int:
    """Seed for one replication of one cell.

    ``x = base XOR (cell_id << 32 | rep)``, then the splitmix64 output step:
    ``z = x + 0x9E3779B97F4A7C15``; ``z = (z ^ z>>30) * 0xBF58476D1CE4E5B9``;
    ``z = (z ^ z>>27) * 0x94D049BB133111EB``; ``z ^ z>>31`` (all mod 2**64).
    """
    if not (0 <= cell_id < 1 << 32 and 0 <= rep < 1 << 32):
        raise ConfigError("cell_id and rep must fit in 32 bits")
    z = (((base & MASK64) ^ ((cell_id << 32) | rep)) + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass
class Cell:
    cell_id: int
    mix: PopulationMix
    overrides: dict[str, Any] = field(default_factory=dict)
    population: str = "custom"
    tags: frozenset[str] = frozenset()

    def params(self, base: ModelParams) -> ModelParams:
        try:
            return replace(base, **self.overrides)
        except TypeError as exc:
            raise ConfigError(f"cell {self.cell_id}: {exc}") from None


@dataclass
class SweepSpec:
    name: str
    base_params: ModelParams
    cells: list[Cell]
    reps: int = 30
    base_seed: int = DEFAULT_SEED

    def validate(self) -> "SweepSpec":
        ids = [c.cell_id for c in self.cells]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"sweep {self.name!r}: duplicate cell ids")
        if self.reps < 2:
            raise ConfigError(f"sweep {self.name!r}: reps must be >= 2")
        for c in self.cells:
            c.params(self.base_params).validate()
        return self

    def cell(self, cell_id: int) -> Cell:
        for c in self.cells:
            if c.cell_id == cell_id:
                return c
        raise KeyError(cell_id)


@dataclass(frozen=True)
class RunRow:
    cell_id: int
    params: ModelParams
    mix: PopulationMix
    seed: int
    metrics: MetricsFrame


@dataclass(frozen=True)
class CellSummary:
    cell_id: int
    params: ModelParams
    mix: PopulationMix
    mean: float
    ci_lo: float
    ci_hi: float
    n: int


@dataclass
class ResultTable:
    name: str
    rows: list[RunRow]

    def cell_ids(self) -> list[int]:
        return list(dict.fromkeys(r.cell_id for r in self.rows))

    def values(self, cell_id: int, metric: str = "performance") -> list[float]:
        return [getattr(r.metrics, metric) for r in self.rows if r.cell_id == cell_id]

    def summary(self, metric: str = "performance") -> list[CellSummary]:
        out = []
        for cid in self.cell_ids():
            first = next(r for r in self.rows if r.cell_id == cid)
            vals = self.values(cid, metric)
            mean, lo, hi = stats.mean_ci(vals, 0.95)
            out.append(CellSummary(cid, first.params, first.mix, mean, lo, hi, len(vals)))
        return out

    def means(self, metric: str = "performance") -> dict[int, float]:
        return {s.cell_id: s.mean for s in self.summary(metric)}


# ---------------------------------------------------------------------------
# figure designs

def _split_rest(cooperators: float, reciprocator_share: float) -> PopulationMix:
    rest = 1.0 - cooperators
    recip = rest * reciprocator_share
    return PopulationMix(cooperators, recip, rest - recip)


def population_mix(name: str) -> PopulationMix:
    if name == "general":
        return mix_general()
    pure = {"cooperators": CooperationType.COOPERATOR,
            "reciprocators": CooperationType.RECIPROCATOR,
            "free_riders": CooperationType.FREE_RIDER}
    if name not in pure:
        raise ConfigError(f"unknown population {name!r}")
    return PopulationMix.pure(pure[name])


def population_of(mix: PopulationMix) -> str:
    for name in POPULATIONS:
        ref = population_mix(name).as_tuple()
        if all(abs(a - b) < 1e-9 for a, b in zip(ref, mix.as_tuple())):
            return name
    return "custom"


def sweep_fig1(base: ModelParams, reps: int = 30, seed: int = DEFAULT_SEED) -> SweepSpec:
    """Cooperator share sweep, non-rival goods, fully diverse needs.

    Non-cooperators split 63:20 between reciprocators and free riders.
    """
    cells = []
    for i, pc in enumerate(FIG1_COOPERATOR_LEVELS):
        tags = frozenset({"star"}) if pc == GENERAL_COOPERATOR_SHARE else frozenset()
        cells.append(Cell(FIG1_BASE_ID + i, _split_rest(pc, 63 / 83),
                          {"rivalry": 0.0, "heterogeneity": 1.0}, tags=tags))
    return SweepSpec("fig1", base, cells, reps, seed).validate()


def sweep_fig1_callout(base: ModelParams, reps: int = 30, seed: int = DEFAULT_SEED) -> SweepSpec:
    cells = [Cell(CALLOUT_BASE_ID + i, _split_rest(CALLOUT_COOPERATORS, share),
                  {"rivalry": 0.0, "heterogeneity": 1.0})
             for i, share in enumerate(CALLOUT_RECIPROCATOR_SHARES)]
    return SweepSpec("fig1_callout", base, cells, reps, seed).validate()


def sweep_fig2(base: ModelParams, reps: int = 30, seed: int = DEFAULT_SEED) -> SweepSpec:
    cells = []
    for pop in POPULATIONS:
        for r in FIG2_LEVELS:
            for h in FIG2_LEVELS:
                cells.append(Cell(FIG2_BASE_ID + len(cells), population_mix(pop),
                                  {"rivalry": r, "heterogeneity": h}, population=pop))
    return SweepSpec("fig2", base, cells, reps, seed).validate()


def sweep_fig3(base: ModelParams, reps: int = 30, seed: int = DEFAULT_SEED) -> SweepSpec:
    cells = []
    for i, r in enumerate(FIG3_LEVELS):
        for j, h in enumerate(FIG3_LEVELS):
            corner = i in (0, 10) and j in (0, 10)
            cells.append(Cell(FIG3_BASE_ID + 11 * i + j, mix_general(),
                              {"rivalry": r, "heterogeneity": h}, population="general",
                              tags=frozenset({"corner"}) if corner else frozenset()))
    return SweepSpec("fig3", base, cells, reps, seed).validate()


SWEEPS = {
    "fig1": sweep_fig1,
    "fig1_callout": sweep_fig1_callout,
    "fig2": sweep_fig2,
    "fig3": sweep_fig3,
}


# ---------------------------------------------------------------------------
# execution

class SweepError(RuntimeError):
    def __init__(self, cell_id: int, seed: int, cause: BaseException):
        super().__init__(f"cell {cell_id} seed {seed} failed: {cause!r}")
        self.cell_id = cell_id
        self.seed = seed


def _run_unit(unit: tuple[int, ModelParams, PopulationMix, int]) -> RunResult:
    cell_id, params, mix, seed = unit
    try:
        return run(params, mix, seed)
    except Exception as exc:  # noqa: BLE001 - re-raised with cell and seed
        raise SweepError(cell_id, seed, exc) from exc


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> ResultTable:
    """Run ``spec.reps`` replications of every cell.

    Row order is spec cell order, then replication; the table does not depend
    on ``parallelism``.
    """
    spec.validate()
    units = [(c.cell_id, c.params(spec.base_params), c.mix, derive_seed(spec.base_seed, c.cell_id, rep))
             for c in spec.cells for rep in range(spec.reps)]
    log.info("sweep %s: %d cells x %d reps, parallelism %d",
             spec.name, len(spec.cells), spec.reps, parallelism)
    results = parallel_map(_run_unit, units, parallelism)
    rows = [RunRow(cid, res.params, res.mix, res.seed,
                   MetricsFrame(res.performance, res.efficiency, res.gini, res.top20_share))
            for (cid, *_), res in zip(units, results)]
    return ResultTable(spec.name, rows)


def corner_tukey(table: ResultTable, alpha: float = 0.001) -> list[stats.PairwiseResult]:
    """Tukey HSD over the four (rivalry, heterogeneity) corners of a fig3 table."""
    groups = []
    for s in table.summary():
        r, h = s.params.rivalry, s.params.heterogeneity
        if r in (0.0, 1.0) and h in (0.0, 1.0):
            groups.append(stats.GroupSample(f"R={r:g},H={h:g}", table.values(s.cell_id)))
    if len(groups) != 4:
        raise ConfigError(f"expected 4 corner cells, found {len(groups)}")
    return stats.tukey_hsd(groups, alpha=alpha)
