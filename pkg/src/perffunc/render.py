"""Standalone SVG figures: T-M diagrams and cost-vs-performance curves.

Output is deterministic text (fixed viewport, fixed palette, fixed number
formatting) so figures can be diffed and checked geometrically in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .analysis import Contour
from .core import CostModel, ExpansionPath, RealizableRegion
from .errors import RenderError

WIDTH = 800
HEIGHT = 600
MARGIN = 0.10
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#17becf",
)
ISOPERF_COLOR = "#ff7f0e"
ISOCOST_COLOR = "#1f77b4"
PATH_COLOR = "#d62728"
REGION_FILL = "#bbbbbb"


@dataclass(frozen=True)
class Transform:
    """Affine map from data coordinates to SVG pixels (y axis flipped)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: float = WIDTH
    height: float = HEIGHT
    margin: float = MARGIN

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise RenderError("axis ranges must have positive extent")

    @property
    def left(self) -> float:
        return self.margin * self.width

    @property
    def right(self) -> float:
        return (1 - self.margin) * self.width

    @property
    def top(self) -> float:
        return self.margin * self.height

    @property
    def bottom(self) -> float:
        return (1 - self.margin) * self.height

    def to_px(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        px = self.left + (x - self.x_min) / (self.x_max - self.x_min) * (self.right - self.left)
        py = self.bottom - (y - self.y_min) / (self.y_max - self.y_min) * (self.bottom - self.top)
        return px, py

    def to_data(self, px, py):
        px = np.asarray(px, dtype=float)
        py = np.asarray(py, dtype=float)
        x = self.x_min + (px - self.left) / (self.right - self.left) * (self.x_max - self.x_min)
        y = self.y_min + (self.bottom - py) / (self.bottom - self.top) * (self.y_max - self.y_min)
        return x, y


@dataclass(frozen=True)
class TmDiagramSpec:
    """What to draw on a T-M diagram.

    ``isocosts`` are ``(slope, intercept)`` pairs of lines ``m = slope*t + intercept``.
    """

    contours: Sequence[Contour] = ()
    isocosts: Sequence[tuple[float, float]] = ()
    path: ExpansionPath | None = None
    region: RealizableRegion | None = None
    guide_mt_line: bool = True
    t_range: tuple[float, float] = (0.0, 1.0)
    m_range: tuple[float, float] = (0.0, 1.0)
    title: str = ""
    x_label: str = "T (translated examples)"
    y_label: str = "M (manual examples)"
    contour_labels: bool = True
    extra_contours: Sequence[Contour] = field(default=())

    def __post_init__(self):
        if not (self.t_range[1] > self.t_range[0] >= 0 and self.m_range[1] > self.m_range[0] >= 0):
            raise RenderError("axis ranges must be non-negative with positive extent")


def isocosts_for_path(path: ExpansionPath, cm: CostModel) -> list[tuple[float, float]]:
    """Isocost lines through every point of ``path``."""
    return [(cm.isocost_slope, p.cost / cm.c_m) for p in path]


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * span:
        ticks.append(round(v, 10))
        v += step
    return ticks


def _tick_label(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return f"{v:g}"


def _clip_segment(x0, y0, x1, y1, box):
    """Liang-Barsky clip of one segment; returns the clipped endpoints or None."""
    xmin, xmax, ymin, ymax = box
    dx, dy = x1 - x0, y1 - y0
    u0, u1 = 0.0, 1.0
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0), (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            u0 = max(u0, r)
        else:
            u1 = min(u1, r)
        if u0 > u1:
            return None
    return (x0 + u0 * dx, y0 + u0 * dy, x0 + u1 * dx, y0 + u1 * dy)


def clip_polyline(points: np.ndarray, box) -> list[np.ndarray]:
    """Split a polyline into the pieces that lie inside ``box = (xmin, xmax, ymin, ymax)``."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 1:
        x, y = pts[0]
        inside = box[0] <= x <= box[1] and box[2] <= y <= box[3]
        return [pts.copy()] if inside else []
    pieces: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        seg = _clip_segment(x0, y0, x1, y1, box)
        if seg is None:
            if current:
                pieces.append(current)
                current = []
            continue
        a = (seg[0], seg[1])
        b = (seg[2], seg[3])
        if current and current[-1] != a:
            pieces.append(current)
            current = []
        if not current:
            current.append(a)
        current.append(b)
        if b != (x1, y1):
            pieces.append(current)
            current = []
    if current:
        pieces.append(current)
    return [np.array(p) for p in pieces if len(p) >= 2]


def clip_line(slope: float, intercept: float, box) -> tuple[float, float, float, float] | None:
    """Segment of ``y = slope*x + intercept`` inside ``box``."""
    xmin, xmax = box[0], box[1]
    return _clip_segment(xmin, slope * xmin + intercept, xmax, slope * xmax + intercept, box)


class _Svg:
    def __init__(self, title: str):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f"<title>{escape(title)}</title>",
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        ]

    def add(self, s: str):
        self.parts.append(s)

    def text(self, x, y, s, anchor="middle", size=12, cls=None, extra=""):
        c = f' class="{cls}"' if cls else ""
        self.add(
            f'<text{c} x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}"{extra}>{escape(s)}</text>'
        )

    def polyline(self, tr: Transform, pts: np.ndarray, cls: str, color: str, width=1.5, extra=""):
        px, py = tr.to_px(pts[:, 0], pts[:, 1])
        coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        self.add(
            f'<polyline class="{cls}" points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{extra}/>'
        )

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _axes(svg: _Svg, tr: Transform, x_label: str, y_label: str):
    svg.add(
        f'<g class="axes" stroke="#000000" stroke-width="1">'
        f'<line x1="{_fmt(tr.left)}" y1="{_fmt(tr.bottom)}" x2="{_fmt(tr.right)}" y2="{_fmt(tr.bottom)}"/>'
        f'<line x1="{_fmt(tr.left)}" y1="{_fmt(tr.bottom)}" x2="{_fmt(tr.left)}" y2="{_fmt(tr.top)}"/></g>'
    )
    for v in _nice_ticks(tr.x_min, tr.x_max):
        px, _ = tr.to_px(v, tr.y_min)
        svg.add(
            f'<line class="xtick" x1="{_fmt(px)}" y1="{_fmt(tr.bottom)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(tr.bottom + 5)}" stroke="#000000"/>'
        )
        svg.text(px, tr.bottom + 18, _tick_label(v), size=11)
    for v in _nice_ticks(tr.y_min, tr.y_max):
        _, py = tr.to_px(tr.x_min, v)
        svg.add(
            f'<line class="ytick" x1="{_fmt(tr.left - 5)}" y1="{_fmt(py)}" x2="{_fmt(tr.left)}" '
            f'y2="{_fmt(py)}" stroke="#000000"/>'
        )
        svg.text(tr.left - 8, py + 4, _tick_label(v), anchor="end", size=11)
    svg.text((tr.left + tr.right) / 2, HEIGHT - 15, x_label, size=13)
    svg.text(
        20,
        (tr.top + tr.bottom) / 2,
        y_label,
        size=13,
        extra=f' transform="rotate(-90 20 {_fmt((tr.top + tr.bottom) / 2)})"',
    )


def _legend(svg: _Svg, tr: Transform, entries: list[tuple[str, str, str]]):
    """``entries`` are ``(label, color, dash)`` triples."""
    x = tr.right - 190
    y = tr.top + 10
    svg.add(f'<g class="legend">')
    svg.add(
        f'<rect x="{_fmt(x - 8)}" y="{_fmt(y - 4)}" width="195" height="{_fmt(18 * len(entries) + 8)}" '
        f'fill="#ffffff" fill-opacity="0.85" stroke="#888888"/>'
    )
    for k, (label, color, dash) in enumerate(entries):
        yy = y + 10 + 18 * k
        d = f' stroke-dasharray="{dash}"' if dash else ""
        svg.add(
            f'<line class="legend-key" x1="{_fmt(x)}" y1="{_fmt(yy)}" x2="{_fmt(x + 24)}" y2="{_fmt(yy)}" '
            f'stroke="{color}" stroke-width="2"{d}/>'
        )
        svg.text(x + 30, yy + 4, label, anchor="start", size=11, cls="legend-entry")
    svg.add("</g>")


def render_tm_diagram(spec: TmDiagramSpec) -> str:
    """Draw isoperfs, isocosts, the expansion path and the realizable region."""
    if not (spec.contours or spec.isocosts or (spec.path is not None and len(spec.path)) or spec.extra_contours):
        raise RenderError("nothing to draw: no contours, isocosts or expansion path")
    tr = Transform(spec.t_range[0], spec.t_range[1], spec.m_range[0], spec.m_range[1])
    box = (spec.t_range[0], spec.t_range[1], spec.m_range[0], spec.m_range[1])
    svg = _Svg(spec.title or "T-M diagram")
    svg.add(
        f'<defs><clipPath id="plot-area"><rect x="{_fmt(tr.left)}" y="{_fmt(tr.top)}" '
        f'width="{_fmt(tr.right - tr.left)}" height="{_fmt(tr.bottom - tr.top)}"/></clipPath></defs>'
    )
    legend = []

    if spec.region is not None and spec.region.p_max > box[0]:
        edge = min(spec.region.p_max, box[1])
        x0, y0 = tr.to_px(box[0], box[3])
        x1, y1 = tr.to_px(edge, box[2])
        svg.add(
            f'<rect class="realizable-region" x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y1 - y0)}" fill="{REGION_FILL}" fill-opacity="0.35" '
            f'data-pmax="{_fmt(spec.region.p_max) if math.isfinite(spec.region.p_max) else "inf"}"/>'
        )
        legend.append(("realizable region T <= P", REGION_FILL, ""))

    svg.add('<g clip-path="url(#plot-area)">')
    if spec.guide_mt_line:
        seg = clip_line(1.0, 0.0, box)
        if seg is not None:
            px0, py0 = tr.to_px(seg[0], seg[1])
            px1, py1 = tr.to_px(seg[2], seg[3])
            svg.add(
                f'<line class="guide-mt" x1="{_fmt(px0)}" y1="{_fmt(py0)}" x2="{_fmt(px1)}" y2="{_fmt(py1)}" '
                f'stroke="#555555" stroke-dasharray="6,4"/>'
            )
            legend.append(("M = T", "#555555", "6,4"))

    for slope, intercept in spec.isocosts:
        seg = clip_line(slope, intercept, box)
        if seg is None:
            continue
        px0, py0 = tr.to_px(seg[0], seg[1])
        px1, py1 = tr.to_px(seg[2], seg[3])
        svg.add(
            f'<line class="isocost" x1="{_fmt(px0)}" y1="{_fmt(py0)}" x2="{_fmt(px1)}" y2="{_fmt(py1)}" '
            f'stroke="{ISOCOST_COLOR}" stroke-width="1.2" data-slope="{slope!r}" data-intercept="{intercept!r}"/>'
        )
    if spec.isocosts:
        legend.append(("isocost", ISOCOST_COLOR, ""))

    for group, dash in ((spec.contours, ""), (spec.extra_contours, "4,3")):
        for c in group:
            d = f' stroke-dasharray="{dash}"' if dash else ""
            extra = f' data-level="{c.level!r}" data-source="{c.source}"{d}'
            color = ISOPERF_COLOR if c.source == "amue" else "#2ca02c"
            for piece in clip_polyline(c.vertices, box):
                svg.polyline(tr, piece, "isoperf", color, 1.8, extra)
    sources = sorted({c.source for c in spec.contours} | {c.source for c in spec.extra_contours})
    for s in sources:
        legend.append(
            (f"isoperf ({s.upper()})", ISOPERF_COLOR if s == "amue" else "#2ca02c", "" if s == "amue" else "4,3")
        )

    if spec.path is not None and len(spec.path):
        pts = np.column_stack([spec.path.t, spec.path.m])
        for piece in clip_polyline(pts, box):
            svg.polyline(tr, piece, "expansion-path", PATH_COLOR, 2.2)
        for p in spec.path:
            if not (box[0] <= p.t <= box[1] and box[2] <= p.m <= box[3]):
                continue
            px, py = tr.to_px(p.t, p.m)
            svg.add(
                f'<circle class="tangency" cx="{_fmt(px)}" cy="{_fmt(py)}" r="4" fill="{PATH_COLOR}" '
                f'data-pi="{p.pi!r}" data-boundary="{str(p.on_boundary).lower()}"/>'
            )
        legend.append(("expansion path", PATH_COLOR, ""))
    svg.add("</g>")

    if spec.contour_labels:
        for c in spec.contours:
            inside = [
                v for v in c.vertices if box[0] <= v[0] <= box[1] and box[2] <= v[1] <= box[3]
            ]
            if not inside:
                continue
            v = inside[len(inside) // 2]
            px, py = tr.to_px(v[0], v[1])
            svg.text(px + 4, py - 4, f"{c.level:.4g}", anchor="start", size=10, cls="contour-label")

    _axes(svg, tr, spec.x_label, spec.y_label)
    if spec.title:
        svg.text(WIDTH / 2, tr.top / 2 + 6, spec.title, size=15, cls="title")
    _legend(svg, tr, legend)
    return svg.finish()


def render_cost_curve(
    curves: Sequence[tuple[str, Sequence[tuple[float, float]]]],
    title: str = "Performance vs minimum cost",
    x_label: str = "minimum cost",
    y_label: str = "performance",
) -> str:
    """One line per series of ``(performance, cost)`` pairs, cost on the x axis."""
    if not curves:
        raise RenderError("no series to draw")
    arrays = []
    for label, series in curves:
        arr = np.asarray(series, dtype=float).reshape(-1, 2)
        if len(arr) == 0:
            raise RenderError(f"series {label!r} is empty")
        if np.any(np.diff(arr[:, 1]) < 0):
            raise RenderError(f"series {label!r} is not sorted by cost")
        arrays.append((label, arr))
    allpts = np.vstack([a for _, a in arrays])
    c_lo, c_hi = 0.0, float(allpts[:, 1].max())
    p_lo, p_hi = float(allpts[:, 0].min()), float(allpts[:, 0].max())
    if c_hi <= c_lo:
        c_hi = c_lo + 1.0
    pad = 0.05 * (p_hi - p_lo) if p_hi > p_lo else 1.0
    tr = Transform(c_lo, c_hi * 1.05, max(p_lo - pad, 0.0), p_hi + pad)
    svg = _Svg(title)
    legend = []
    for k, (label, arr) in enumerate(arrays):
        color = PALETTE[k % len(PALETTE)]
        pts = np.column_stack([arr[:, 1], arr[:, 0]])
        svg.polyline(tr, pts, "cost-curve", color, 2.0, f" data-label={quoteattr(label)}")
        legend.append((label, color, ""))
    _axes(svg, tr, x_label, y_label)
    svg.text(WIDTH / 2, tr.top / 2 + 6, title, size=15, cls="title")
    _legend(svg, tr, legend)
    return svg.finish()
