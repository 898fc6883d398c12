"""Run-level metrics: need-satisfaction performance, value/cost efficiency and
contribution disparity."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .model import ConfigError

if TYPE_CHECKING:
    from .engine import RunResult


@dataclass(frozen=True)
class MetricsFrame:
    performance: float
    efficiency: float
    gini: float
    top20_share: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def performance(r: "RunResult") -> float:
    """Share of needs met (from the commons or by self-production) in the window."""
    if r.window_needs_total <= 0:
        raise ConfigError("measurement window is empty")
    return (r.window_needs_met_commons + r.window_needs_met_self) / r.window_needs_total


def efficiency(r: "RunResult") -> float:
    """Value of satisfied needs per unit of production and contribution cost.

    ``inf`` when value was created at zero cost; 0 when nothing happened.
    """
    if r.total_cost_in == 0:
        return math.inf if r.total_value_out > 0 else 0.0
    return r.total_value_out / r.total_cost_in


def contribution_gini(counts: Sequence[int]) -> float:
    x = np.sort(np.asarray(counts, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ConfigError("gini of an empty sequence")
    total = x.sum()
    if total == 0:
        return 0.0
    # sum_ij |xi - xj| = 2 * sum_i (2i - n - 1) x_(i), i = 1..n
    ranks = np.arange(1, n + 1, dtype=np.float64)
    pair_sum = 2.0 * np.dot(2.0 * ranks - n - 1.0, x)
    return float(pair_sum / (2.0 * n * total))


def top_share(counts: Sequence[int], q: float) -> float:
    """Fraction of all contributions made by the top ``ceil(q*n)`` agents.

    Returns 0 when nobody contributed.
    """
    if not 0.0 < q <= 1.0:
        raise ConfigError(f"q must be in (0, 1], got {q}")
    x = np.sort(np.asarray(counts, dtype=np.float64))[::-1]
    if x.size == 0:
        raise ConfigError("top share of an empty sequence")
    total = x.sum()
    if total == 0:
        return 0.0
    k = math.ceil(q * x.size - 1e-12)
    return float(x[:k].sum() / total)


def compute(r: "RunResult") -> MetricsFrame:
    return MetricsFrame(
        performance=performance(r),
        efficiency=efficiency(r),
        gini=contribution_gini(r.contributions),
        top20_share=top_share(r.contributions, 0.2),
    )
