"""Minimal SVG document builder with deterministic number formatting."""

from __future__ import annotations

import math
from typing import Iterable, Sequence
from xml.sax.saxutils import escape, quoteattr


def num(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class Element:
    def __init__(self, tag: str, text: str | None = None, **attrs):
        self.tag = tag
        self.text = text
        self.attrs = {k.rstrip("_").replace("_", "-"): v for k, v in attrs.items() if v is not None}
        self.children: list[Element] = []

    def add(self, child: "Element") -> "Element":
        self.children.append(child)
        return child

    def extend(self, children: Iterable["Element"]) -> "Element":
        self.children.extend(children)
        return self

    def _attr_text(self) -> str:
        parts = []
        for k, v in self.attrs.items():
            v = num(v) if isinstance(v, float) else str(v)
            parts.append(f" {k}={quoteattr(v)}")
        return "".join(parts)

    def render(self, depth: int = 0) -> str:
        pad = "  " * depth
        head = f"{pad}<{self.tag}{self._attr_text()}"
        if not self.children and self.text is None:
            return head + "/>\n"
        if not self.children:
            return f"{head}>{escape(self.text)}</{self.tag}>\n"
        inner = "".join(c.render(depth + 1) for c in self.children)
        return f"{head}>\n{inner}{pad}</{self.tag}>\n"


def document(width: int, height: int) -> Element:
    root = Element("svg", xmlns="http://www.w3.org/2000/svg", width=width, height=height,
                   viewBox=f"0 0 {width} {height}", font_family="sans-serif", font_size=11)
    root.add(Element("rect", x=0, y=0, width=width, height=height, fill="white"))
    return root


def to_string(root: Element) -> str:
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + root.render()


def points(xy: Sequence[tuple[float, float]]) -> str:
    return " ".join(f"{num(x)},{num(y)}" for x, y in xy)


def star(cx: float, cy: float, r: float, **attrs) -> Element:
    pts = []
    for i in range(10):
        rad = r if i % 2 == 0 else r * 0.45
        a = -math.pi / 2 + i * math.pi / 5
        pts.append((cx + rad * math.cos(a), cy + rad * math.sin(a)))
    return Element("polygon", points=points(pts), **attrs)


class Axes:
    """Linear data-to-pixel mapping for one rectangular plot area."""

    def __init__(self, left: float, top: float, width: float, height: float,
                 xlim: tuple[float, float], ylim: tuple[float, float]):
        self.left, self.top, self.width, self.height = left, top, width, height
        self.xlim, self.ylim = xlim, ylim

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        return self.left + (v - lo) / (hi - lo) * self.width

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        return self.top + self.height - (v - lo) / (hi - lo) * self.height

    def frame(self, xticks: Sequence[float], yticks: Sequence[float], xlabel: str, ylabel: str,
              tickfmt=lambda v: f"{v:g}") -> Element:
        g = Element("g", class_="axes")
        bottom = self.top + self.height
        g.add(Element("line", x1=self.left, y1=bottom, x2=self.left + self.width, y2=bottom, stroke="black"))
        g.add(Element("line", x1=self.left, y1=self.top, x2=self.left, y2=bottom, stroke="black"))
        for v in xticks:
            px = self.x(v)
            g.add(Element("line", x1=px, y1=bottom, x2=px, y2=bottom + 4, stroke="black"))
            g.add(Element("text", tickfmt(v), x=px, y=bottom + 15, text_anchor="middle"))
        for v in yticks:
            py = self.y(v)
            g.add(Element("line", x1=self.left - 4, y1=py, x2=self.left, y2=py, stroke="black"))
            g.add(Element("line", x1=self.left, y1=py, x2=self.left + self.width, y2=py,
                          stroke="#dddddd", stroke_width=0.5))
            g.add(Element("text", tickfmt(v), x=self.left - 7, y=py + 4, text_anchor="end"))
        g.add(Element("text", xlabel, x=self.left + self.width / 2, y=bottom + 32, text_anchor="middle"))
        cy = self.top + self.height / 2
        g.add(Element("text", ylabel, x=self.left - 38, y=cy, text_anchor="middle",
                      transform=f"rotate(-90 {num(self.left - 38)} {num(cy)})"))
        return g
