"""SVG renderings of the three figures from sweep result tables."""

from __future__ import annotations

from typing import Sequence

from . import experiments as ex
from .csvio import MissingDataError
from .experiments import CellSummary, ResultTable
from .model import ModelParams
from .stats import PairwiseResult, marginal_improvements
from .svg import Axes, Element, document, num, points, star, to_string

POP_COLORS = {"cooperators": "#1f77b4", "general": "#2ca02c", "reciprocators": "#9467bd"}
LEVEL_COLORS = ("#d62728", "#ff7f0e", "#17becf")
LEVEL_DASH = (None, "6 3", "2 2")
UNIT_TICKS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def _require(table: ResultTable | None, sweep: str) -> dict[int, CellSummary]:
    expected = [c.cell_id for c in ex.SWEEPS[sweep](ModelParams(), reps=2).cells]
    have = {s.cell_id: s for s in table.summary()} if table is not None else {}
    missing = [cid for cid in expected if cid not in have]
    if missing:
        raise MissingDataError(f"{sweep}: missing cells {missing}")
    return {cid: have[cid] for cid in expected}


def _series(ax: Axes, xy: Sequence[tuple[float, float]], color: str, width: float = 1.5,
            dash: str | None = None, cls: str = "series", label: str | None = None) -> Element:
    g = Element("g", class_=cls, data_label=label)
    g.add(Element("polyline", points=points([(ax.x(x), ax.y(y)) for x, y in xy]), fill="none",
                  stroke=color, stroke_width=width, stroke_dasharray=dash))
    for x, y in xy:
        g.add(Element("circle", cx=ax.x(x), cy=ax.y(y), r=2.5, fill=color))
    return g


def _whiskers(ax: Axes, pts: Sequence[tuple[float, float, float]], color: str) -> Element:
    g = Element("g", class_="ci")
    for x, lo, hi in pts:
        px = ax.x(x)
        g.add(Element("line", x1=px, y1=ax.y(hi), x2=px, y2=ax.y(lo), stroke=color))
        for v in (lo, hi):
            g.add(Element("line", x1=px - 3, y1=ax.y(v), x2=px + 3, y2=ax.y(v), stroke=color))
    return g


def _legend(x: float, y: float, entries: Sequence[tuple[str, str, str | None]]) -> Element:
    g = Element("g", class_="legend")
    for i, (label, color, dash) in enumerate(entries):
        yy = y + 14 * i
        g.add(Element("line", x1=x, y1=yy, x2=x + 18, y2=yy, stroke=color, stroke_width=2,
                      stroke_dasharray=dash))
        g.add(Element("text", label, x=x + 23, y=yy + 4))
    return g


def render_fig1(fig1: ResultTable | None, callout: ResultTable | None) -> str:
    main = _require(fig1, "fig1")
    inset = _require(callout, "fig1_callout")
    root = document(760, 500)
    root.add(Element("text", "Performance by proportion of cooperators", x=380, y=22,
                     text_anchor="middle", font_size=14))
    ax = Axes(70, 40, 640, 380, (0.0, 1.0), (0.0, 1.0))
    root.add(ax.frame(UNIT_TICKS, UNIT_TICKS, "Proportion of cooperators",
                      "Mean performance (share of needs met)"))
    pts = sorted((s.mix.cooperators, s) for s in main.values())
    series = [(x, s.mean) for x, s in pts]
    bars = Element("g", class_="marginal-bars")
    for (x0, _), (x1, _), d in zip(series, series[1:], marginal_improvements(series)):
        left, right = ax.x(x0), ax.x(x1)
        pad = min(2.0, (right - left) * 0.15)
        top, base = ax.y(max(d, 0.0)), ax.y(min(d, 0.0))
        bars.add(Element("rect", class_="bar", x=left + pad, y=top, width=right - left - 2 * pad,
                         height=max(base - top, 0.5), fill="#bbbbbb", data_delta=f"{d:.6g}"))
    root.add(bars)
    root.add(_whiskers(ax, [(x, s.ci_lo, s.ci_hi) for x, s in pts], "#444444"))
    root.add(_series(ax, series, "black", width=2.0, cls="series main-line"))
    tags = {c.cell_id: c.tags for c in ex.SWEEPS["fig1"](ModelParams(), reps=2).cells}
    for cid, s in main.items():
        if "star" in tags[cid]:
            g = root.add(Element("g", class_="star", data_x=f"{s.mix.cooperators:g}"))
            g.add(star(ax.x(s.mix.cooperators), ax.y(s.mean) - 16, 8, fill="gold", stroke="black"))

    # callout: reciprocator share of the non-cooperators at 5% cooperators
    box = root.add(Element("g", class_="inset"))
    box.add(Element("rect", x=400, y=210, width=290, height=175, fill="white", stroke="#888888"))
    box.add(Element("text", "Cooperators fixed at 5%", x=545, y=226, text_anchor="middle"))
    iax = Axes(450, 240, 220, 100, (0.0, 1.0), (0.0, 1.0))
    box.add(iax.frame((0.0, 0.25, 0.5, 0.75, 1.0), (0.0, 0.5, 1.0),
                      "Reciprocator share of the other 95%", "Perf."))
    ipts = sorted((s.mix.reciprocators / (1.0 - s.mix.cooperators), s) for s in inset.values())
    box.add(_whiskers(iax, [(x, s.ci_lo, s.ci_hi) for x, s in ipts], "#444444"))
    box.add(_series(iax, [(x, s.mean) for x, s in ipts], "#1f77b4", cls="series inset-line"))
    root.add(Element("text", "Rivalry none, need heterogeneity high; whiskers: 95% CI; "
                             "bars: marginal improvement; star: general population (13%)",
                     x=70, y=490, font_size=10))
    return to_string(root)


def _mean_over(summaries: Sequence[CellSummary]) -> float:
    return sum(s.mean for s in summaries) / len(summaries)


def render_fig2(table: ResultTable | None) -> str:
    cells = _require(table, "fig2")
    spec = ex.SWEEPS["fig2"](ModelParams(), reps=2)
    by_key = {}
    for c in spec.cells:
        s = cells[c.cell_id]
        by_key[(c.population, s.params.rivalry, s.params.heterogeneity)] = s
    plotted = ("cooperators", "general", "reciprocators")
    levels = ex.FIG2_LEVELS

    root = document(1080, 490)
    root.add(Element("text", "How rivalry, need heterogeneity and composition interact",
                     x=540, y=22, text_anchor="middle", font_size=14))

    def panel(idx: int, title: str, xlabel: str) -> tuple[Element, Axes]:
        g = root.add(Element("g", class_="panel", id=f"panel-{title}"))
        ax = Axes(70 + idx * 345, 50, 260, 300, (0.0, 1.0), (0.0, 1.0))
        g.add(Element("text", title, x=ax.left - 40, y=40, font_size=16, font_weight="bold"))
        g.add(ax.frame(levels, UNIT_TICKS, xlabel, "Mean performance"))
        return g, ax

    # A: rivalry main effect, one line per heterogeneity level
    g, ax = panel(0, "A", "Rivalry")
    for k, h in enumerate(levels):
        xy = [(r, _mean_over([by_key[(p, r, h)] for p in plotted])) for r in levels]
        g.add(_series(ax, xy, LEVEL_COLORS[k], dash=LEVEL_DASH[k], cls="series h-line",
                      label=f"H={h:g}"))
    g.add(_series(ax, [(r, _mean_over([by_key[(p, r, h)] for p in plotted for h in levels]))
                       for r in levels], "black", width=3, cls="series main-effect"))
    g.add(_legend(ax.left + 10, 400, [("main effect", "black", None)] +
                  [(f"heterogeneity {h:g}", LEVEL_COLORS[k], LEVEL_DASH[k]) for k, h in enumerate(levels)]))

    # B: heterogeneity main effect, one line per rivalry level
    g, ax = panel(1, "B", "Need heterogeneity")
    for k, r in enumerate(levels):
        xy = [(h, _mean_over([by_key[(p, r, h)] for p in plotted])) for h in levels]
        g.add(_series(ax, xy, LEVEL_COLORS[k], dash=LEVEL_DASH[k], cls="series r-line",
                      label=f"R={r:g}"))
    g.add(_series(ax, [(h, _mean_over([by_key[(p, r, h)] for p in plotted for r in levels]))
                       for h in levels], "black", width=3, cls="series main-effect"))
    g.add(_legend(ax.left + 10, 400, [("main effect", "black", None)] +
                  [(f"rivalry {r:g}", LEVEL_COLORS[k], LEVEL_DASH[k]) for k, r in enumerate(levels)]))

    # C: every population x heterogeneity combination against rivalry
    g, ax = panel(2, "C", "Rivalry")
    for p in plotted:
        for k, h in enumerate(levels):
            xy = [(r, by_key[(p, r, h)].mean) for r in levels]
            g.add(_series(ax, xy, POP_COLORS[p], dash=LEVEL_DASH[k], cls="series pop-line",
                          label=f"{p} H={h:g}"))
    g.add(_legend(ax.left + 10, 400, [(p, POP_COLORS[p], None) for p in plotted] +
                  [(f"dash: heterogeneity {h:g}", "#666666", LEVEL_DASH[k]) for k, h in enumerate(levels)]))

    fr_max = max(by_key[("free_riders", r, h)].mean for r in levels for h in levels)
    root.add(Element("text", f"Free-rider populations (not plotted): max mean performance "
                             f"{fr_max:.4f} across all 9 conditions",
                     class_="footnote", data_max=f"{fr_max:.6g}", x=70, y=482, font_size=10))
    return to_string(root)


def _ramp(t: float) -> str:
    """Green (low) through yellow to red (high)."""
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        r, g = int(round(510 * t)), 170 + int(round(85 * 2 * t))
    else:
        r, g = 255, int(round(255 * (2 - 2 * t)))
    return f"#{r:02x}{min(g, 255):02x}00"


N_COLOR_CLASSES = 10


def color_class(v: float, lo: float, hi: float) -> int:
    if hi <= lo:
        return 0
    return min(N_COLOR_CLASSES - 1, int((v - lo) / (hi - lo) * N_COLOR_CLASSES))


def _stars(p: float) -> str:
    return "***" if p < 0.001 else "**" if p < 0.01 else "*" if p < 0.05 else "n.s."


def render_fig3(table: ResultTable | None, tukey: Sequence[PairwiseResult]) -> str:
    cells = _require(table, "fig3")
    if len(tukey) != 6:
        raise MissingDataError(f"fig3: expected 6 corner comparisons, got {len(tukey)}")
    means = [s.mean for s in cells.values()]
    lo, hi = min(means), max(means)
    root = document(860, 520)
    root.add(Element("text", "Performance of the general population", x=300, y=22,
                     text_anchor="middle", font_size=14))
    size = 34
    left, top = 90, 50
    n = len(ex.FIG3_LEVELS)
    ax = Axes(left, top, n * size, n * size, (-0.05, 1.05), (-0.05, 1.05))
    root.add(ax.frame((0.0, 0.2, 0.4, 0.6, 0.8, 1.0), (0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
                      "Need heterogeneity", "Rivalry"))
    grid = root.add(Element("g", class_="heatmap"))
    for s in cells.values():
        i = ex.FIG3_LEVELS.index(round(s.params.rivalry, 1))
        j = ex.FIG3_LEVELS.index(round(s.params.heterogeneity, 1))
        cls = color_class(s.mean, lo, hi)
        x, y = left + j * size, top + (n - 1 - i) * size
        grid.add(Element("rect", class_="cell", x=x, y=y, width=size, height=size,
                         fill=_ramp((cls + 0.5) / N_COLOR_CLASSES), data_r=f"{s.params.rivalry:g}",
                         data_h=f"{s.params.heterogeneity:g}", data_mean=f"{s.mean:.6g}",
                         data_class=cls))
        if i in (0, n - 1) and j in (0, n - 1):
            grid.add(Element("rect", class_="corner", x=x + 1, y=y + 1, width=size - 2,
                             height=size - 2, fill="none", stroke="black", stroke_width=2))
            grid.add(Element("text", f"{s.mean:.2f}", x=x + size / 2, y=y + size / 2 + 4,
                             text_anchor="middle", font_size=9))

    legend = root.add(Element("g", class_="legend"))
    lx, ly = left + n * size + 30, top
    legend.add(Element("text", "Mean performance", x=lx, y=ly - 6))
    for k in range(N_COLOR_CLASSES):
        legend.add(Element("rect", x=lx, y=ly + (N_COLOR_CLASSES - 1 - k) * 16, width=20, height=16,
                           fill=_ramp((k + 0.5) / N_COLOR_CLASSES)))
    legend.add(Element("text", f"{hi:.3f} (high)", class_="ramp-max", x=lx + 26, y=ly + 12))
    legend.add(Element("text", f"{lo:.3f} (low)", class_="ramp-min", x=lx + 26,
                       y=ly + N_COLOR_CLASSES * 16 - 3))

    ann = root.add(Element("g", class_="tukey"))
    tx, ty = lx, ly + N_COLOR_CLASSES * 16 + 40
    ann.add(Element("text", "Tukey HSD, corner pairs", x=tx, y=ty, font_weight="bold"))
    for k, res in enumerate(tukey):
        pair = ann.add(Element("g", class_="tukey-pair", data_p=f"{res.p:.3g}"))
        p_txt = "p<0.001" if res.p < 0.001 else f"p={res.p:.3f}"
        pair.add(Element("text", f"{res.labels[0]} vs {res.labels[1]}: diff {res.mean_diff:+.3f}, "
                                 f"{p_txt} {_stars(res.p)}", x=tx, y=ty + 16 * (k + 1), font_size=10))
    return to_string(root)
