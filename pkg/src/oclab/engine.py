"""Tick procedure, single runs and replication batches.

Random stream per run (one ``numpy`` PCG64 generator seeded with the run
seed), consumed tick by tick in this order:

1. ``permutation(N)``: the consumption order for the tick;
2. ``random((N, 2))``: row ``i`` holds the need draw and then the depletion
   draw of the ``i``-th agent in that order (a depletion draw is consumed even
   when the commons is empty);
3. ``random(N)``: one contribution draw per agent, in agent-id order (only
   reciprocators outside their memory window look at it).

The fast path (:func:`tick`) and the object-level reference
(:func:`reference_tick`) consume the stream identically and must agree
bit for bit.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numba
import numpy as np

from . import metrics
from .model import (
    Agent,
    Commons,
    ConfigError,
    CooperationType,
    Hit,
    ModelParams,
    PopulationMix,
    build_population,
    contribute,
    consume_from_commons,
    draw_need,
    willing_to_contribute,
)

log = logging.getLogger(__name__)

# counter slots
CUM_IN, CUM_OUT, WIN_TOTAL, WIN_COMMONS, WIN_SELF, PRODUCED, CONTRIBUTED, MET_ALL = range(8)
N_COUNTERS = 8


@dataclass
class TickState:
    """Population and commons as flat arrays, indexed by agent id / good."""

    tick: int
    ctype: np.ndarray
    specialty: np.ndarray
    last_receipt: np.ndarray  # -1 = never received
    needs_total: np.ndarray
    needs_met_commons: np.ndarray
    needs_met_self: np.ndarray
    contributions: np.ndarray
    stock: np.ndarray
    counters: np.ndarray = field(default_factory=lambda: np.zeros(N_COUNTERS, dtype=np.int64))

    @classmethod
    def initial(cls, params: ModelParams, mix: PopulationMix) -> "TickState":
        agents = build_population(params, mix)
        n = len(agents)
        return cls(
            tick=0,
            ctype=np.array([a.ctype for a in agents], dtype=np.int8),
            specialty=np.array([a.specialty for a in agents], dtype=np.int64),
            last_receipt=np.full(n, -1, dtype=np.int64),
            needs_total=np.zeros(n, dtype=np.int64),
            needs_met_commons=np.zeros(n, dtype=np.int64),
            needs_met_self=np.zeros(n, dtype=np.int64),
            contributions=np.zeros(n, dtype=np.int64),
            stock=np.zeros(params.n_goods, dtype=np.int64),
        )

    @property
    def cumulative_in(self) -> int:
        return int(self.counters[CUM_IN])

    @property
    def cumulative_out(self) -> int:
        return int(self.counters[CUM_OUT])

    def value_out(self, params: ModelParams) -> float:
        return params.benefit * int(self.counters[MET_ALL])

    def cost_in(self, params: ModelParams) -> float:
        return (params.production_cost * int(self.counters[PRODUCED])
                + params.contribution_cost * int(self.counters[CONTRIBUTED]))


@numba.njit(cache=True)
def _tick_kernel(t, in_window, perm, draws, explore_draws, ctype, specialty, last_receipt,
                 needs_total, met_commons, met_self, contributions, stock, counters,
                 rivalry, heterogeneity, n_goods, memory, explore, priming):
    n = perm.shape[0]
    common = 1.0 - heterogeneity
    # phase 1: consumption in permutation order
    for pos in range(n):
        i = perm[pos]
        u = draws[pos, 0]
        if u < common:
            need = 0
        else:
            need = int((u - common) / heterogeneity * n_goods)
            if need > n_goods - 1:
                need = n_goods - 1
        needs_total[i] += 1
        if in_window:
            counters[2] += 1
        if stock[need] > 0:
            if draws[pos, 1] < rivalry:
                stock[need] -= 1
                counters[1] += 1
            met_commons[i] += 1
            last_receipt[i] = t
            counters[7] += 1
            if in_window:
                counters[3] += 1
        elif need == specialty[i]:
            met_self[i] += 1
            counters[5] += 1
            counters[7] += 1
            if in_window:
                counters[4] += 1
    # phase 2: contributions in id order, visible from the next tick on
    for i in range(n):
        c = ctype[i]
        if c == 0:
            willing = True
        elif c == 2:
            willing = False
        elif t <= priming:
            willing = True
        elif last_receipt[i] >= 0 and t - last_receipt[i] <= memory:
            willing = True
        else:
            willing = explore_draws[i] < explore
        if willing:
            stock[specialty[i]] += 1
            counters[0] += 1
            counters[5] += 1
            counters[6] += 1
            contributions[i] += 1


def tick(state: TickState, params: ModelParams, rng: np.random.Generator) -> TickState:
    """Advance ``state`` by one tick in place and return it."""
    n = state.ctype.shape[0]
    t = state.tick + 1
    perm = rng.permutation(n)
    draws = rng.random((n, 2))
    explore_draws = rng.random(n)
    _tick_kernel(t, t > params.warmup, perm, draws, explore_draws, state.ctype,
                 state.specialty, state.last_receipt, state.needs_total,
                 state.needs_met_commons, state.needs_met_self, state.contributions,
                 state.stock, state.counters, float(params.rivalry),
                 float(params.heterogeneity), params.n_goods, params.memory,
                 float(params.explore), params.priming)
    state.tick = t
    return state


@dataclass(frozen=True)
class RunResult:
    params: ModelParams
    mix: PopulationMix
    seed: int
    window_needs_total: int
    window_needs_met_commons: int
    window_needs_met_self: int
    needs_met_total: int
    units_produced: int
    units_contributed: int
    cumulative_in: int
    cumulative_out: int
    total_value_out: float
    total_cost_in: float
    contributions: tuple[int, ...]
    performance: float = float("nan")
    efficiency: float = float("nan")
    gini: float = float("nan")
    top20_share: float = float("nan")


class RunError(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"run with seed {seed} failed: {cause!r}")
        self.seed = seed
        self.cause = cause


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def _result(params: ModelParams, mix: PopulationMix, seed: int, counters: np.ndarray,
            contributions: Sequence[int]) -> RunResult:
    c = [int(x) for x in counters]
    raw = RunResult(
        params=params, mix=mix, seed=seed,
        window_needs_total=c[WIN_TOTAL],
        window_needs_met_commons=c[WIN_COMMONS],
        window_needs_met_self=c[WIN_SELF],
        needs_met_total=c[MET_ALL],
        units_produced=c[PRODUCED],
        units_contributed=c[CONTRIBUTED],
        cumulative_in=c[CUM_IN],
        cumulative_out=c[CUM_OUT],
        total_value_out=params.benefit * c[MET_ALL],
        total_cost_in=params.production_cost * c[PRODUCED] + params.contribution_cost * c[CONTRIBUTED],
        contributions=tuple(int(x) for x in contributions),
    )
    return replace(raw, **metrics.compute(raw).as_dict())


def run(params: ModelParams, mix: PopulationMix, seed: int) -> RunResult:
    """One full run; a pure function of ``(params, mix, seed)``."""
    params.validate()
    seed = _check_seed(seed)
    rng = np.random.default_rng(seed)
    state = TickState.initial(params, mix)
    for _ in range(params.horizon):
        tick(state, params, rng)
    return _result(params, mix, seed, state.counters, state.contributions)


def reference_tick(agents: list[Agent], commons: Commons, t: int, params: ModelParams,
                   rng: np.random.Generator, counters: np.ndarray) -> None:
    """Object-level tick built from the scalar rules in :mod:`oclab.model`."""
    in_window = t > params.warmup
    for i in rng.permutation(len(agents)):
        agent = agents[i]
        need = draw_need(params.heterogeneity, params.n_goods, rng)
        outcome = consume_from_commons(commons, need, params.rivalry, rng)
        agent.needs_total += 1
        counters[WIN_TOTAL] += in_window
        if isinstance(outcome, Hit):
            agent.needs_met_commons += 1
            agent.last_receipt_tick = t
            counters[MET_ALL] += 1
            counters[WIN_COMMONS] += in_window
        elif need == agent.specialty:
            agent.needs_met_self += 1
            counters[PRODUCED] += 1
            counters[MET_ALL] += 1
            counters[WIN_SELF] += in_window
    for agent in agents:
        if willing_to_contribute(agent, t, params, rng):
            contribute(commons, agent.specialty)
            agent.contributions += 1
            counters[PRODUCED] += 1
            counters[CONTRIBUTED] += 1
    counters[CUM_IN] = commons.cumulative_in
    counters[CUM_OUT] = commons.cumulative_out


def run_reference(params: ModelParams, mix: PopulationMix, seed: int) -> RunResult:
    """Slow pure-Python run; used to cross-check :func:`run`."""
    params.validate()
    seed = _check_seed(seed)
    rng = np.random.default_rng(seed)
    agents = build_population(params, mix, rng)
    commons = Commons.empty(params.n_goods)
    counters = np.zeros(N_COUNTERS, dtype=np.int64)
    for t in range(1, params.horizon + 1):
        reference_tick(agents, commons, t, params, rng, counters)
    return _result(params, mix, seed, counters, [a.contributions for a in agents])


def _run_tagged(job: tuple[ModelParams, PopulationMix, int]) -> RunResult:
    params, mix, seed = job
    try:
        return run(params, mix, seed)
    except Exception as exc:  # noqa: BLE001 - re-raised with the seed attached
        raise RunError(seed, exc) from exc


def run_replications(params: ModelParams, mix: PopulationMix, seeds: Sequence[int],
                     parallelism: int = 1) -> list[RunResult]:
    """Run once per seed; results come back in seed order for any parallelism."""
    if len(seeds) == 0:
        raise ConfigError("seeds must be non-empty")
    params.validate()
    jobs = [(params, mix, s) for s in seeds]
    return parallel_map(_run_tagged, jobs, parallelism)


def parallel_map(fn, items: Sequence, parallelism: int) -> list:
    """Ordered map, in-process for ``parallelism == 1``, else a process pool."""
    if parallelism < 1:
        raise ConfigError(f"parallelism must be >= 1, got {parallelism}")
    if parallelism == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * parallelism))
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
