"""Domain types and agent-level rules of the open-collaboration model.

Agents hold one cooperative type for the whole run and can produce exactly one
good type (their specialty). Every tick an agent draws a need, tries to take a
unit of that good from the shared commons, and may post a unit of its own
specialty back. The functions here are the scalar, one-agent-at-a-time rules;
:mod:`oclab.engine` runs the same rules over whole populations.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, fields
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)

MIX_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid model or application configuration."""


class CooperationType(enum.IntEnum):
    COOPERATOR = 0
    RECIPROCATOR = 1
    FREE_RIDER = 2


@dataclass(frozen=True)
class PopulationMix:
    """Fractions of cooperators, reciprocators and free riders."""

    cooperators: float
    reciprocators: float
    free_riders: float

    def __post_init__(self) -> None:
        parts = self.as_tuple()
        bad = [p for p in parts if not math.isfinite(p) or p < 0.0]
        if bad or abs(sum(parts) - 1.0) > MIX_TOL:
            raise ConfigError(
                f"invalid population mix {parts}: components must be >= 0 and sum to 1"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.cooperators, self.reciprocators, self.free_riders)

    @classmethod
    def pure(cls, ctype: CooperationType) -> "PopulationMix":
        parts = [0.0, 0.0, 0.0]
        parts[int(ctype)] = 1.0
        return cls(*parts)


# Published type frequencies; the 4% that could not be classified are dropped
# and the rest renormalized.
GENERAL_RAW = {"cooperators": 0.13, "reciprocators": 0.63, "free_riders": 0.20, "unclassified": 0.04}


def mix_general() -> PopulationMix:
    """Type composition of the general human population."""
    return PopulationMix(13 / 96, 63 / 96, 20 / 96)


@dataclass(frozen=True)
class ModelParams:
    """One run configuration.

    ``rivalry`` is the chance that consuming a unit removes it from the
    commons; ``heterogeneity`` spreads needs from a single common good (0)
    to uniform over all goods (1). The defaults put the model in its harshest
    corner (fully rival goods, identical needs); the figure sweeps override
    both. ``memory``, ``explore`` and ``priming`` drive reciprocators.
    """

    n_agents: int = 100
    n_goods: int = 20
    rivalry: float = 1.0
    heterogeneity: float = 0.0
    horizon: int = 1000
    warmup: int = 500
    benefit: float = 1.0
    production_cost: float = 0.2
    contribution_cost: float = 0.1
    memory: int = 1
    explore: float = 0.0
    priming: int = 0

    def violations(self) -> list[str]:
        """Human-readable list of every violated bound (empty when valid)."""
        out = []

        def check(name: str, ok: bool, bound: str) -> None:
            if not ok:
                out.append(f"{name}={getattr(self, name)!r} violates {bound}")

        for name in ("n_agents", "n_goods", "horizon", "warmup", "memory", "priming"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                out.append(f"{name}={v!r} must be an integer")
        for name in ("rivalry", "heterogeneity", "benefit", "production_cost",
                     "contribution_cost", "explore"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                out.append(f"{name}={v!r} must be a finite number")
        if out:
            return out
        check("n_agents", self.n_agents >= 1, ">= 1")
        check("n_goods", self.n_goods >= 1, ">= 1")
        check("rivalry", 0.0 <= self.rivalry <= 1.0, "0 <= rivalry <= 1")
        check("heterogeneity", 0.0 <= self.heterogeneity <= 1.0, "0 <= heterogeneity <= 1")
        check("horizon", self.horizon >= 1, ">= 1")
        check("warmup", 0 <= self.warmup < self.horizon, "0 <= warmup < horizon")
        check("benefit", self.benefit > 0.0, "> 0")
        check("production_cost", self.production_cost >= 0.0, ">= 0")
        check("contribution_cost", self.contribution_cost >= 0.0, ">= 0")
        check("memory", self.memory >= 1, ">= 1")
        check("explore", 0.0 <= self.explore <= 1.0, "0 <= explore <= 1")
        check("priming", self.priming >= 0, ">= 0")
        return out

    def validate(self) -> "ModelParams":
        problems = self.violations()
        if problems:
            raise ConfigError("invalid model parameters: " + "; ".join(problems))
        if self.n_goods > self.n_agents:
            log.warning("n_goods=%d > n_agents=%d: some goods have no producer",
                        self.n_goods, self.n_agents)
        return self

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass
class Agent:
    id: int
    ctype: CooperationType
    specialty: int
    last_receipt_tick: int | None = None
    needs_total: int = 0
    needs_met_commons: int = 0
    needs_met_self: int = 0
    contributions: int = 0

    @property
    def receipts(self) -> int:
        return self.needs_met_commons


@dataclass
class Commons:
    """Open stock of goods, one integer count per good type."""

    stock: list[int]
    cumulative_in: int = 0
    cumulative_out: int = 0

    @classmethod
    def empty(cls, n_goods: int) -> "Commons":
        return cls(stock=[0] * n_goods)

    def conserved(self) -> bool:
        return (sum(self.stock) == self.cumulative_in - self.cumulative_out
                and min(self.stock, default=0) >= 0)


class Hit(NamedTuple):
    depleted: bool


class Miss(NamedTuple):
    pass


MISS = Miss()


def apportion(n: int, mix: PopulationMix) -> tuple[int, int, int]:
    """Largest-remainder apportionment of ``n`` seats over the mix.

    Ties in the remainder go to the earlier type (cooperator first).
    """
    quotas = [n * p for p in mix.as_tuple()]
    counts = [math.floor(q) for q in quotas]
    left = n - sum(counts)
    order = sorted(range(3), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts[0], counts[1], counts[2]


def type_layout(n_agents: int, n_goods: int, counts: tuple[int, int, int]) -> np.ndarray:
    """Cooperation type per agent id.

    Seats are filled specialty group by specialty group (all producers of good
    0, then good 1, ...) in type order cooperator, reciprocator, free rider.
    A composition therefore fixes exactly which goods have willing producers.
    """
    order = sorted(range(n_agents), key=lambda i: (i % n_goods, i))
    ctypes = np.empty(n_agents, dtype=np.int8)
    seats = np.repeat(np.arange(3, dtype=np.int8), counts)
    ctypes[np.asarray(order, dtype=np.int64)] = seats
    return ctypes


def build_population(params: ModelParams, mix: PopulationMix,
                     rng: np.random.Generator | None = None) -> list[Agent]:
    """Create ``params.n_agents`` agents with round-robin specialties.

    The layout is deterministic, so ``rng`` is accepted for interface
    symmetry but never drawn from.
    """
    if not isinstance(mix, PopulationMix):
        raise ConfigError(f"expected PopulationMix, got {type(mix).__name__}")
    if params.n_agents < 1:
        raise ConfigError("n_agents must be >= 1")
    counts = apportion(params.n_agents, mix)
    ctypes = type_layout(params.n_agents, params.n_goods, counts)
    return [Agent(id=i, ctype=CooperationType(int(ctypes[i])), specialty=i % params.n_goods)
            for i in range(params.n_agents)]


def need_from_uniform(u: float, heterogeneity: float, n_goods: int) -> int:
    """Map a uniform draw in [0, 1) onto a good type.

    Mass ``1 - h`` sits on good 0 and the remaining ``h`` is spread evenly,
    so good 0 has probability ``1 - h + h/G`` and every other good ``h/G``.
    """
    common = 1.0 - heterogeneity
    if u < common:
        return 0
    return min(n_goods - 1, int((u - common) / heterogeneity * n_goods))


def draw_need(heterogeneity: float, n_goods: int, rng: np.random.Generator) -> int:
    return need_from_uniform(rng.random(), heterogeneity, n_goods)


def willing_to_contribute(agent: Agent, tick: int, params: ModelParams,
                          rng: np.random.Generator) -> bool:
    """Whether ``agent`` posts a unit this tick.

    Always consumes exactly one uniform draw so the random stream stays
    aligned whatever the agent's type.
    """
    u = rng.random()
    if agent.ctype == CooperationType.COOPERATOR:
        return True
    if agent.ctype == CooperationType.FREE_RIDER:
        return False
    if tick <= params.priming:
        return True
    if agent.last_receipt_tick is not None and tick - agent.last_receipt_tick <= params.memory:
        return True
    return u < params.explore


def consume_from_commons(commons: Commons, good: int, rivalry: float,
                         rng: np.random.Generator) -> Hit | Miss:
    # One draw per attempt, including misses.
    u = rng.random()
    if commons.stock[good] == 0:
        return MISS
    if u < rivalry:
        commons.stock[good] -= 1
        commons.cumulative_out += 1
        return Hit(depleted=True)
    return Hit(depleted=False)


def contribute(commons: Commons, good: int) -> Commons:
    commons.stock[good] += 1
    commons.cumulative_in += 1
    return commons
