"""Small inferential-statistics toolkit: t intervals, one-way ANOVA, Tukey HSD.

Distribution functions are computed here rather than taken from a stats
package: t and F through the regularized incomplete beta function
(continued fraction), the studentized range through direct numerical
integration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr

from .model import ConfigError


class StatsError(ValueError):
    """Input outside the domain of a statistical procedure."""


@dataclass(frozen=True)
class GroupSample:
    label: str
    values: tuple[float, ...]

    def __init__(self, label, values: Iterable[float]):
        object.__setattr__(self, "label", str(label))
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        if not all(math.isfinite(v) for v in self.values):
            raise StatsError(f"group {self.label!r} has non-finite values")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / len(self.values)


@dataclass(frozen=True)
class PairwiseResult:
    labels: tuple[str, str]
    mean_diff: float
    q: float
    p: float
    significant: bool


class AnovaResult(NamedTuple):
    F: float
    df_between: int
    df_within: int
    p: float


class TTestResult(NamedTuple):
    t: float
    df: int
    p: float


# ---------------------------------------------------------------------------
# special functions

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise StatsError("betainc needs a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|)."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_ppf(p: float, df: float) -> float:
    """Quantile of Student's t by bisection on :func:`t_cdf`."""
    if not 0.0 < p < 1.0:
        raise StatsError(f"t quantile needs 0 < p < 1, got {p}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_ppf(1.0 - p, df)
    hi = 1.0
    while t_cdf(hi, df) < p:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def f_cdf(f: float, d1: float, d2: float) -> float:
    if f <= 0:
        return 0.0
    if math.isinf(f):
        return 1.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2))


def f_sf(f: float, d1: float, d2: float) -> float:
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


# ---------------------------------------------------------------------------
# studentized range

@lru_cache(maxsize=None)
def _gl_panels(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


_Z_NODES, _Z_WEIGHTS = _gl_panels(-8.5, 8.5, 20, 10)
_Z_PDF = np.exp(-0.5 * _Z_NODES**2) / math.sqrt(2.0 * math.pi)


def _range_cdf_normal(w: np.ndarray, k: int) -> np.ndarray:
    """CDF of the range of ``k`` iid standard normals, evaluated at ``w``."""
    w = np.asarray(w, dtype=np.float64)
    z = _Z_NODES
    inner = ndtr(z) - ndtr(z[None, :] - w[..., None].reshape(-1, 1))
    inner = np.clip(inner, 0.0, 1.0) ** (k - 1)
    vals = k * (inner * (_Z_PDF * _Z_WEIGHTS)).sum(axis=1)
    return np.clip(vals, 0.0, 1.0).reshape(w.shape)


def ptukey(q, k: int, df: float) -> np.ndarray | float:
    """CDF of the studentized range statistic for ``k`` means and ``df``
    error degrees of freedom (``df=inf`` for a known variance)."""
    if k < 2:
        raise StatsError("studentized range needs k >= 2")
    if df <= 0:
        raise StatsError("studentized range needs df > 0")
    scalar = np.ndim(q) == 0
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    out = np.zeros_like(q)
    pos = q > 0
    if math.isinf(df):
        out[pos] = _range_cdf_normal(q[pos], k)
    elif pos.any():
        # s = sqrt(chi2_df / df); integrate P(range <= q s) against its density
        spread = 9.0 / math.sqrt(2.0 * df)
        s, ws = _gl_panels(max(0.0, 1.0 - spread), 1.0 + spread + 1.0 / df, 16, 10)
        log_g = (0.5 * df * math.log(df) - math.lgamma(0.5 * df) - (0.5 * df - 1.0) * math.log(2.0)
                 + (df - 1.0) * np.log(s) - 0.5 * df * s * s)
        g = np.exp(log_g) * ws
        qq = q[pos]
        inner = _range_cdf_normal((qq[:, None] * s[None, :]).ravel(), k).reshape(qq.size, s.size)
        out[pos] = inner @ g
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# procedures

def _values(g) -> np.ndarray:
    return np.asarray(g.values if isinstance(g, GroupSample) else g, dtype=np.float64)


def mean_ci(values: Sequence[float], level: float = 0.95) -> tuple[float, float, float]:
    """Mean with a two-sided Student t confidence interval."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise StatsError("confidence interval needs n >= 2")
    if not 0.0 < level < 1.0:
        raise StatsError(f"level must be in (0, 1), got {level}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    half = t_ppf((1.0 + level) / 2.0, x.size - 1) * sd / math.sqrt(x.size)
    return mean, mean - half, mean + half


def ttest_pooled(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sample t test with pooled variance, two-sided."""
    x, y = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise StatsError("t test needs n >= 2 per group")
    df = x.size + y.size - 2
    sp2 = ((x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1)) / df
    diff = x.mean() - y.mean()
    if sp2 == 0:
        if diff == 0:
            raise StatsError("degenerate variance: all observations identical")
        return TTestResult(math.copysign(math.inf, diff), df, 0.0)
    t = diff / math.sqrt(sp2 * (1.0 / x.size + 1.0 / y.size))
    return TTestResult(float(t), df, t_sf2(t, df))


def _within(groups) -> tuple[list[np.ndarray], float, int]:
    arrays = [_values(g) for g in groups]
    if len(arrays) < 2:
        raise StatsError("need at least two groups")
    if any(a.size < 2 for a in arrays):
        raise StatsError("every group needs n >= 2")
    ssw = float(sum(((a - a.mean()) ** 2).sum() for a in arrays))
    df_w = sum(a.size for a in arrays) - len(arrays)
    return arrays, ssw, df_w


def anova_oneway(groups: Sequence[GroupSample | Sequence[float]]) -> AnovaResult:
    arrays, ssw, df_w = _within(groups)
    grand = np.concatenate(arrays).mean()
    ssb = float(sum(a.size * (a.mean() - grand) ** 2 for a in arrays))
    df_b = len(arrays) - 1
    if ssw == 0.0:
        if ssb == 0.0:
            raise StatsError("degenerate variance: all observations identical")
        return AnovaResult(math.inf, df_b, df_w, 0.0)
    F = (ssb / df_b) / (ssw / df_w)
    return AnovaResult(F, df_b, df_w, f_sf(F, df_b, df_w))


def _q_matrix(arrays: list[np.ndarray], msw: float) -> dict[tuple[int, int], tuple[float, float]]:
    out = {}
    for i, j in itertools.combinations(range(len(arrays)), 2):
        diff = float(arrays[i].mean() - arrays[j].mean())
        se = math.sqrt(msw / 2.0 * (1.0 / arrays[i].size + 1.0 / arrays[j].size))
        out[(i, j)] = (diff, abs(diff) / se)
    return out


def tukey_hsd(groups: Sequence[GroupSample], alpha: float = 0.05, method: str = "integrate",
              n_permutations: int = 2000, seed: int = 0) -> list[PairwiseResult]:
    """All-pairs Tukey HSD.

    ``method="integrate"`` takes p values from the studentized range
    distribution; ``method="permutation"`` instead compares each q with the
    permutation distribution of the largest pairwise q (label shuffles of the
    pooled data), which is useful for cross-checking the integration.
    """
    groups = [g if isinstance(g, GroupSample) else GroupSample(str(i), g)
              for i, g in enumerate(groups)]
    arrays, ssw, df_w = _within(groups)
    if ssw <= 0.0:
        raise StatsError("degenerate variance: pooled within-group variance is zero")
    k = len(arrays)
    msw = ssw / df_w
    stats = _q_matrix(arrays, msw)
    pairs = list(stats)
    qs = np.array([stats[p][1] for p in pairs])
    if method == "integrate":
        pvals = 1.0 - np.asarray(ptukey(qs, k, df_w))
    elif method == "permutation":
        rng = np.random.default_rng(seed)
        pooled = np.concatenate(arrays)
        cuts = np.cumsum([a.size for a in arrays])[:-1]
        exceed = np.zeros(len(pairs))
        for _ in range(n_permutations):
            parts = np.split(rng.permutation(pooled), cuts)
            ssw_p = float(sum(((a - a.mean()) ** 2).sum() for a in parts))
            if ssw_p == 0.0:
                exceed += 1
                continue
            qmax = max(q for _, q in _q_matrix(parts, ssw_p / df_w).values())
            exceed += qmax >= qs - 1e-12
        pvals = (exceed + 1.0) / (n_permutations + 1.0)
    else:
        raise ConfigError(f"unknown Tukey method {method!r}")
    pvals = np.clip(pvals, 0.0, 1.0)
    results = [PairwiseResult(labels=(groups[i].label, groups[j].label),
                              mean_diff=stats[(i, j)][0], q=float(q), p=float(p),
                              significant=bool(p < alpha))
               for (i, j), q, p in zip(pairs, qs, pvals)]
    if len(results) != k * (k - 1) // 2:
        raise ArithmeticError("pair count mismatch")
    return results


def marginal_improvements(series: Sequence[tuple[float, float]]) -> list[float]:
    """Differences between consecutive means of an x-sorted series."""
    if len(series) < 2:
        raise StatsError("need at least two points")
    xs = [x for x, _ in series]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise StatsError("series must be sorted by strictly increasing x")
    return [b - a for (_, a), (_, b) in zip(series, series[1:])]
