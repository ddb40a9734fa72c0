"""Isoperf contours, GPR least-cost search and M/T trend classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .contour import find_contours
from .core import (
    AmueParams,
    CostModel,
    OperatingPoint,
    RealizableRegion,
    _isoperf_m_array,
    _require_level,
    _t_axis_intercept,
    isoperf_m_of_t,
)
from .errors import InfeasibleError
from .fitting.gpr import GprModel, gpr_predict

CONTOUR_TOLERANCE = 0.05
DEFAULT_TREND_TOL = 0.02


@dataclass(frozen=True, eq=False)
class Contour:
    """One polyline of an isoperf; ``vertices`` is a ``(k, 2)`` array of ``(t, m)``."""

    level: float
    vertices: np.ndarray
    source: str = "amue"

    def __len__(self):
        return len(self.vertices)

    @property
    def t(self) -> np.ndarray:
        return self.vertices[:, 0]

    @property
    def m(self) -> np.ndarray:
        return self.vertices[:, 1]


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid ``[t_min, t_max] x [m_min, m_max]``."""

    t_max: float
    m_max: float
    n_t: int = 200
    n_m: int = 200
    t_min: float = 0.0
    m_min: float = 0.0

    def __post_init__(self):
        if not (0 <= self.t_min < self.t_max and 0 <= self.m_min < self.m_max):
            raise ValueError("grid extents must be non-negative and non-empty")
        if self.n_t < 2 or self.n_m < 2:
            raise ValueError("a grid needs at least two nodes per axis")

    @classmethod
    def for_model(cls, model: GprModel, p_max: float | None = None, n: int = 200) -> "GridSpec":
        """Default grid: translated axis up to ``p_max`` (or the largest observed T),
        manual axis up to 1.25 times the largest observed M."""
        X = model.training_inputs
        t_max = p_max if p_max is not None and math.isfinite(p_max) and p_max > 0 else float(X[:, 0].max())
        m_max = 1.25 * float(X[:, 1].max())
        return cls(t_max=t_max if t_max > 0 else 1.0, m_max=m_max if m_max > 0 else 1.0, n_t=n, n_m=n)

    @property
    def t_nodes(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @property
    def m_nodes(self) -> np.ndarray:
        return np.linspace(self.m_min, self.m_max, self.n_m)


@dataclass(frozen=True)
class TrendClass:
    """Direction of the manual-to-translated ratio along the expansion path."""

    label: str
    delta: float = field(default=0.0)

    def __str__(self):
        return self.label


def amue_isoperf_contour(params: AmueParams, pi_c: float, t_grid: Iterable[float]) -> Contour:
    """Closed-form isoperf sampled at ``t_grid``, skipping ``t`` beyond the T-axis intercept."""
    _require_level(params, pi_c, strict=True)
    t = np.unique(np.asarray(list(t_grid), dtype=float))
    if t.size == 0 or t[0] < 0:
        raise ValueError("t_grid must be a non-empty list of non-negative values")
    isoperf_m_of_t(params, pi_c, float(t[0]))  # raises on a degenerate manual term
    m = _isoperf_m_array(params, pi_c, t)
    ok = ~np.isnan(m)
    if not ok.any():
        raise InfeasibleError(f"isoperf {pi_c!r} is undefined on the whole grid")
    return Contour(level=float(pi_c), vertices=np.column_stack([t[ok], m[ok]]), source="amue")


def isoperf_bundle(params: AmueParams, levels: Sequence[float], t_max: float, n: int = 200) -> list[Contour]:
    """Closed-form isoperfs for several levels on a shared grid, refined near the T-axis.

    Each contour also gets its exact T-axis intercept appended when it lies
    within ``[0, t_max]`` so the curve reaches the axis.
    """
    base = np.linspace(0.0, t_max, n)
    out = []
    for lvl in levels:
        extra = []
        if params.t_active:
            t0 = _t_axis_intercept(params, lvl)
            if t0 <= t_max:
                extra.append(t0)
        out.append(amue_isoperf_contour(params, lvl, np.concatenate([base, extra])))
    return out


def _gpr_field(model: GprModel):
    return lambda t, m: gpr_predict(model, t, m, include_noise=False)[0]


def gpr_isoperf_contour(model: GprModel, pi_c: float, grid_spec: GridSpec | None = None) -> list[Contour]:
    """Level-set polylines of the GPR posterior mean.

    Returns an empty list when ``pi_c`` is outside the range of the mean on
    the grid.  Vertices are bisected onto the level along their cell edges.
    """
    grid = grid_spec or GridSpec.for_model(model)
    f = _gpr_field(model)
    tt, mm = np.meshgrid(grid.t_nodes, grid.m_nodes)
    Z = f(tt, mm)
    if not (Z.min() <= pi_c <= Z.max()):
        return []
    lines = find_contours(grid.t_nodes, grid.m_nodes, Z, pi_c, field=f)
    return [Contour(level=float(pi_c), vertices=v, source="gpr") for v in lines if len(v) >= 1]


def _boundary_crossings(f, t_b: float, m_nodes: np.ndarray, level: float, iterations: int = 60) -> np.ndarray:
    """``m`` values where ``f(t_b, m)`` crosses ``level`` between grid nodes."""
    z = f(np.full_like(m_nodes, t_b), m_nodes)
    above = z >= level
    idx = np.flatnonzero(above[:-1] != above[1:])
    if idx.size == 0:
        return np.empty(0)
    lo = np.where(~above[idx], m_nodes[idx], m_nodes[idx + 1])
    hi = np.where(~above[idx], m_nodes[idx + 1], m_nodes[idx])
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = f(np.full_like(mid, t_b), mid) < level
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def gpr_least_cost_point(
    model: GprModel,
    cm: CostModel,
    region: RealizableRegion,
    pi_c: float,
    grid_spec: GridSpec | None = None,
) -> OperatingPoint:
    """Cheapest point of the GPR isoperf inside the realizable region.

    Candidates are the (edge-refined) contour vertices with ``t <= p_max``
    plus the level crossings on the boundary line ``t = p_max``.
    """
    grid = grid_spec or GridSpec.for_model(model, region.p_max)
    f = _gpr_field(model)
    contours = gpr_isoperf_contour(model, pi_c, grid)
    cand = [c.vertices[c.vertices[:, 0] <= region.p_max] for c in contours]
    pts = np.vstack(cand) if cand else np.empty((0, 2))
    boundary = np.zeros(len(pts), dtype=bool)
    if grid.t_min <= region.p_max < grid.t_max:
        mb = _boundary_crossings(f, region.p_max, grid.m_nodes, pi_c)
        if mb.size:
            pts = np.vstack([pts, np.column_stack([np.full_like(mb, region.p_max), mb])])
            boundary = np.concatenate([boundary, np.ones(mb.size, dtype=bool)])
    if len(pts) == 0:
        raise InfeasibleError(f"GPR isoperf {pi_c!r} does not enter the realizable region on the grid")
    cost = cm.c_t * pts[:, 0] + cm.c_m * pts[:, 1]
    # ties go to the smallest t
    best = np.lexsort((pts[:, 0], cost))[0]
    t, m = float(pts[best, 0]), float(pts[best, 1])
    return OperatingPoint(
        t=t,
        m=m,
        pi=float(f(np.array([t]), np.array([m]))[0]),
        cost=float(cost[best]),
        on_boundary=bool(boundary[best]) or t >= region.p_max,
    )


def classify_mt_trend(params: AmueParams, tol: float = DEFAULT_TREND_TOL) -> TrendClass:
    """How M/T moves along the expansion path as performance grows.

    Along the path ``M/T`` is proportional to ``T**((alpha_m - alpha_t)/(1 - alpha_m))``,
    so the sign of ``alpha_m - alpha_t`` decides; differences within ``tol``
    count as constant.
    """
    delta = params.alpha_m - params.alpha_t
    if delta > tol:
        return TrendClass("increasing", delta)
    if delta < -tol:
        return TrendClass("decreasing", delta)
    return TrendClass("constant", delta)


@dataclass(frozen=True)
class IsoperfComparison:
    level: float
    n_shared: int
    max_rel_diff_m: float
    mean_rel_diff_m: float


def compare_isoperfs(
    params: AmueParams,
    model: GprModel,
    levels: Sequence[float],
    grid_spec: GridSpec | None = None,
) -> list[IsoperfComparison]:
    """Relative gap in ``m`` between AMUE and GPR isoperfs at the GPR vertices.

    Levels where either curve is missing are reported with ``n_shared = 0``
    and NaN differences.
    """
    grid = grid_spec or GridSpec.for_model(model)
    out = []
    for lvl in levels:
        rel = []
        for c in gpr_isoperf_contour(model, lvl, grid):
            m_amue = _isoperf_m_array(params, lvl, c.t)
            ok = ~np.isnan(m_amue) & (m_amue > 0)
            rel.append(np.abs(c.m[ok] - m_amue[ok]) / m_amue[ok])
        r = np.concatenate(rel) if rel else np.empty(0)
        if r.size:
            out.append(IsoperfComparison(float(lvl), int(r.size), float(r.max()), float(r.mean())))
        else:
            out.append(IsoperfComparison(float(lvl), 0, math.nan, math.nan))
    return out
