"""Closed-form mathematics of the additive unequal-elasticity performance function.

The performance surface is

    pi(T, M) = a_zs + a_t * T**alpha_t + a_m * M**alpha_m

where ``T`` counts machine-translated examples and ``M`` manually created
ones.  Costs are linear, ``C = c_t * T + c_m * M``, so isocosts are parallel
lines of slope ``-c_t / c_m`` in the T-M plane and the least-cost way of
reaching a performance level is the point where an isocost touches the
isoperf (level curve) from below.

Data sizes are continuous non-negative reals throughout; rounding to whole
examples is left to reporting code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateError,
    DomainError,
    InfeasibleError,
    InfeasiblePerformanceError,
    SingularSlopeError,
)

#: Exponents are capped at ``1 - ALPHA_EPS`` so that ``1 / (1 - alpha)`` stays finite.
ALPHA_EPS = 1e-4
ALPHA_MAX = 1.0 - ALPHA_EPS

#: Coefficients (or coefficient * elasticity products) below this are treated as zero.
COEF_EPS = 1e-10

# bracket search limits for the tangency root
_T_FLOOR = 1e-300
_T_CEIL = 1e300


@dataclass(frozen=True)
class AmueParams:
    """The five coefficients of the performance function.

    ``a_zs`` is the zero-shot performance (on the 0-100 scale), ``a_t`` and
    ``a_m`` scale the translated and manual contributions, ``alpha_t`` and
    ``alpha_m`` are their elasticities.
    """

    a_zs: float
    a_t: float
    alpha_t: float
    a_m: float
    alpha_m: float

    def __post_init__(self):
        for name in ("a_zs", "a_t", "a_m"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {v!r}")
        for name in ("alpha_t", "alpha_m"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= ALPHA_MAX):
                raise DomainError(f"{name} must lie in [0, {ALPHA_MAX}], got {v!r}")

    @property
    def t_active(self) -> bool:
        """Whether translated data has a usable marginal effect."""
        return self.a_t >= COEF_EPS and self.a_t * self.alpha_t >= COEF_EPS

    @property
    def m_active(self) -> bool:
        return self.a_m >= COEF_EPS and self.a_m * self.alpha_m >= COEF_EPS

    def as_dict(self) -> dict:
        return {
            "a_zs": self.a_zs,
            "a_t": self.a_t,
            "alpha_t": self.alpha_t,
            "a_m": self.a_m,
            "alpha_m": self.alpha_m,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AmueParams":
        return cls(
            float(d["a_zs"]),
            float(d["a_t"]),
            float(d["alpha_t"]),
            float(d["a_m"]),
            float(d["alpha_m"]),
        )


@dataclass(frozen=True)
class CostModel:
    """Unit prices of a translated (``c_t``) and a manual (``c_m``) example."""

    c_t: float
    c_m: float

    def __post_init__(self):
        if not (math.isfinite(self.c_t) and self.c_t > 0):
            raise DomainError(f"c_t must be > 0, got {self.c_t!r}")
        if not (math.isfinite(self.c_m) and self.c_m > 0):
            raise DomainError(f"c_m must be > 0, got {self.c_m!r}")

    @classmethod
    def from_ratio(cls, c_t: float, cost_ratio: float) -> "CostModel":
        """Build from the translated unit cost and ``c_t / c_m``."""
        if not cost_ratio > 0:
            raise DomainError(f"cost ratio must be > 0, got {cost_ratio!r}")
        return cls(c_t, c_t / cost_ratio)

    @property
    def cost_ratio(self) -> float:
        return self.c_t / self.c_m

    @property
    def isocost_slope(self) -> float:
        """dM/dT along any isocost line."""
        return -self.c_t / self.c_m


@dataclass(frozen=True)
class RealizableRegion:
    """Translated data cannot exceed the pivot set: ``0 <= T <= p_max``."""

    p_max: float = math.inf

    def __post_init__(self):
        if math.isnan(self.p_max) or self.p_max < 0:
            raise DomainError(f"p_max must be >= 0, got {self.p_max!r}")

    def contains(self, t: float, m: float) -> bool:
        return 0.0 <= t <= self.p_max and m >= 0.0


@dataclass(frozen=True)
class OperatingPoint:
    t: float
    m: float
    pi: float
    cost: float
    on_boundary: bool = False

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "m": self.m,
            "pi": self.pi,
            "cost": self.cost,
            "on_boundary": self.on_boundary,
        }


@dataclass(frozen=True)
class ExpansionPath:
    """Least-cost points ordered by increasing performance."""

    points: tuple[OperatingPoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        for prev, cur in zip(self.points, self.points[1:]):
            if not cur.pi > prev.pi:
                raise ValueError("performance must be strictly increasing along a path")
            if cur.cost < prev.cost * (1 - 1e-12):
                raise ValueError("cost must be non-decreasing along a path")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def t(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def m(self) -> np.ndarray:
        return np.array([p.m for p in self.points])

    @property
    def pi(self) -> np.ndarray:
        return np.array([p.pi for p in self.points])

    @property
    def cost(self) -> np.ndarray:
        return np.array([p.cost for p in self.points])


def _check_sizes(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative, got {x!r}")
    return arr


def _pow0(x: np.ndarray, a: float) -> np.ndarray:
    # x**a with 0**a == 0 for every a, including a == 0
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = x[pos] ** a
    return out


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def amue_eval(params: AmueParams, t, m):
    """Performance at ``(t, m)``; accepts scalars or broadcastable arrays."""
    t = _check_sizes("t", t)
    m = _check_sizes("m", m)
    t, m = np.broadcast_arrays(t, m)
    val = params.a_zs + params.a_t * _pow0(t, params.alpha_t) + params.a_m * _pow0(m, params.alpha_m)
    return _scalar_or_array(val)


def translate_train_perf(params: AmueParams, p) -> float:
    """Performance when the whole pivot set of size ``p`` is translated and no manual data is used."""
    return amue_eval(params, p, 0.0)


def few_shot_perf(params: AmueParams, k) -> float:
    """Performance with ``k`` manual examples and no translated data."""
    return amue_eval(params, 0.0, k)


def total_cost(cm: CostModel, t, m):
    t = _check_sizes("t", t)
    m = _check_sizes("m", m)
    return _scalar_or_array(cm.c_t * t + cm.c_m * m)


def _require_level(params: AmueParams, pi_c: float, strict: bool = False):
    if not math.isfinite(pi_c) or pi_c < params.a_zs or (strict and pi_c <= params.a_zs):
        raise InfeasiblePerformanceError(
            f"performance {pi_c!r} is not above the zero-shot level {params.a_zs!r}"
        )


def _isoperf_m_array(params: AmueParams, pi_c: float, t: np.ndarray) -> np.ndarray:
    """Vectorised isoperf; NaN where translated data alone already exceeds ``pi_c``."""
    num = pi_c - params.a_zs - params.a_t * _pow0(t, params.alpha_t)
    out = np.full_like(num, np.nan, dtype=float)
    ok = num >= 0
    out[ok] = (num[ok] / params.a_m) ** (1.0 / params.alpha_m)
    return out


def isoperf_m_of_t(params: AmueParams, pi_c: float, t: float) -> float | None:
    """Manual data needed to reach ``pi_c`` given ``t`` translated examples.

    Returns ``None`` when ``t`` alone already exceeds ``pi_c``.  Raises
    :class:`DegenerateError` when the manual term is inactive (the isoperf is
    then a vertical line at a fixed ``t``).
    """
    _require_level(params, pi_c)
    if params.a_m < COEF_EPS or params.alpha_m <= 0:
        raise DegenerateError("manual-data term is zero; the isoperf is vertical in T")
    t_arr = _check_sizes("t", t)
    m = _isoperf_m_array(params, float(pi_c), np.atleast_1d(t_arr))[0]
    return None if math.isnan(m) else float(m)


def isoperf_slope(params: AmueParams, t: float, m: float) -> float:
    """dM/dT along the isoperf through ``(t, m)``; never positive."""
    if params.a_t < COEF_EPS or params.alpha_t == 0.0:
        return 0.0
    if params.a_m < COEF_EPS or params.alpha_m == 0.0:
        raise DegenerateError("manual-data term is zero; the isoperf slope is infinite")
    _check_sizes("t", t)
    _check_sizes("m", m)
    if t <= 0 or m <= 0:
        raise SingularSlopeError(f"isoperf slope is singular on an axis (t={t!r}, m={m!r})")
    ratio = (params.alpha_t * params.a_t) / (params.alpha_m * params.a_m)
    return -ratio * t ** (params.alpha_t - 1.0) / m ** (params.alpha_m - 1.0)


def expansion_path_coefficient(params: AmueParams, cm: CostModel) -> float:
    """Multiplier ``k`` in the expansion path ``M = k * T**((1-alpha_t)/(1-alpha_m))``."""
    if not params.t_active:
        raise DegenerateError("translated-data term is zero; the expansion path is the M axis (T = 0)")
    if not params.m_active:
        raise DegenerateError("manual-data term is zero; the expansion path is the T axis (M = 0)")
    base = (cm.c_t * params.a_m * params.alpha_m) / (cm.c_m * params.a_t * params.alpha_t)
    return base ** (1.0 / (1.0 - params.alpha_m))


def approximate_path_slope(params: AmueParams, cm: CostModel) -> float:
    """Slope of the expansion path when both elasticities are taken equal to ``alpha_m``.

    In that case the path is the straight line ``M = s * T`` with
    ``s = (c_t * a_m / (c_m * a_t)) ** (1 / (1 - alpha_m))``.
    """
    if params.a_t < COEF_EPS:
        raise DegenerateError("translated-data term is zero; the expansion path is the M axis (T = 0)")
    return (cm.c_t * params.a_m / (cm.c_m * params.a_t)) ** (1.0 / (1.0 - params.alpha_m))


def expansion_path_m_of_t(params: AmueParams, cm: CostModel, t):
    """Manual data at the tangency point whose translated share is ``t``."""
    t_arr = _check_sizes("t", t)
    k = expansion_path_coefficient(params, cm)
    expo = (1.0 - params.alpha_t) / (1.0 - params.alpha_m)
    return _scalar_or_array(k * t_arr**expo)


def _point(params: AmueParams, cm: CostModel, t: float, m: float, on_boundary=False) -> OperatingPoint:
    return OperatingPoint(
        t=float(t),
        m=float(m),
        pi=float(amue_eval(params, t, m)),
        cost=float(cm.c_t * t + cm.c_m * m),
        on_boundary=on_boundary,
    )


def _t_axis_intercept(params: AmueParams, pi_c: float) -> float:
    """Translated data that reaches ``pi_c`` with no manual data."""
    if not params.t_active:
        raise InfeasibleError("neither data source improves performance")
    try:
        return ((pi_c - params.a_zs) / params.a_t) ** (1.0 / params.alpha_t)
    except OverflowError:
        return math.inf


def _solve_increasing(g, lo: float = 1.0, hi: float = 1.0) -> tuple[float, float]:
    """Bracket and bisect (geometrically) the root of an increasing ``g`` on (0, inf).

    Returns ``(lo, hi)`` with ``g(lo) < 0 <= g(hi)``.  ``lo`` collapses to 0
    when ``g`` is non-negative all the way down to the floor.
    """
    while g(lo) >= 0:
        lo *= 0.5
        if lo < _T_FLOOR:
            return 0.0, lo * 2
    hi = max(hi, lo)
    while g(hi) < 0:
        hi *= 2.0
        if hi > _T_CEIL:
            raise InfeasiblePerformanceError("performance level not reachable along the expansion path")
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def tangency_point(params: AmueParams, cm: CostModel, pi_c: float) -> OperatingPoint:
    """Unconstrained least-cost point on the isoperf ``pi_c``.

    For active coefficients this is where the isoperf slope equals the
    isocost slope.  It is found by walking along the expansion path: the
    performance there increases monotonically with ``t``, so a bracketed
    bisection on ``t`` converges without derivatives.  If one data source
    has no effect the answer lies on the other axis.
    """
    _require_level(params, pi_c, strict=True)
    if not params.t_active and not params.m_active:
        raise InfeasiblePerformanceError("neither data source improves performance")
    if not params.t_active:
        return _point(params, cm, 0.0, isoperf_m_of_t(params, pi_c, 0.0))
    if not params.m_active:
        return _point(params, cm, _t_axis_intercept(params, pi_c), 0.0)

    k = expansion_path_coefficient(params, cm)
    expo = (1.0 - params.alpha_t) / (1.0 - params.alpha_m)

    def gap(t):
        m = k * t**expo
        return params.a_t * t**params.alpha_t + params.a_m * m**params.alpha_m - (pi_c - params.a_zs)

    lo, hi = _solve_increasing(gap)
    if lo == 0.0:
        # the level sits so close to zero-shot that it is met before any
        # representable amount of data along the path
        return _point(params, cm, 0.0, isoperf_m_of_t(params, pi_c, 0.0))
    t = hi if abs(gap(hi)) <= abs(gap(lo)) else lo
    return _point(params, cm, t, k * t**expo)


def least_cost_point(
    params: AmueParams,
    cm: CostModel,
    region: RealizableRegion,
    pi_c: float,
) -> OperatingPoint:
    """Cheapest realizable point reaching ``pi_c``.

    Cost along an isoperf is convex in ``t``, so when the unconstrained
    tangency lies beyond ``p_max`` the constrained optimum sits exactly on
    the boundary ``t = p_max``.
    """
    _require_level(params, pi_c, strict=True)
    if not params.m_active:
        if not params.t_active:
            raise InfeasibleError("neither data source improves performance")
        t = _t_axis_intercept(params, pi_c)
        if t > region.p_max:
            raise InfeasibleError(
                f"level {pi_c!r} needs t={t:.6g} translated examples but at most {region.p_max!r} are realizable"
            )
        return _point(params, cm, t, 0.0)

    tan = tangency_point(params, cm, pi_c)
    if tan.t <= region.p_max:
        return tan
    t = float(region.p_max)
    m = isoperf_m_of_t(params, pi_c, t)
    if m is None:  # pragma: no cover - excluded by convexity, kept as a guard
        raise InfeasibleError("isoperf does not pass above the realizable boundary")
    return _point(params, cm, t, m, on_boundary=True)


def _check_levels(params: AmueParams, pi_levels: Sequence[float]) -> list[float]:
    levels = [float(p) for p in pi_levels]
    if not levels:
        raise ValueError("at least one performance level is required")
    for a, b in zip(levels, levels[1:]):
        if not b > a:
            raise ValueError("performance levels must be strictly increasing")
    if levels[0] <= params.a_zs:
        raise InfeasiblePerformanceError(
            f"performance level {levels[0]!r} is not above zero-shot {params.a_zs!r}"
        )
    return levels


def trace_expansion_path(
    params: AmueParams,
    cm: CostModel,
    region: RealizableRegion,
    pi_levels: Iterable[float],
) -> ExpansionPath:
    levels = _check_levels(params, list(pi_levels))
    return ExpansionPath(tuple(least_cost_point(params, cm, region, p) for p in levels))


def min_cost_curve(
    params: AmueParams,
    cm: CostModel,
    region: RealizableRegion,
    pi_levels: Iterable[float],
) -> list[tuple[float, float]]:
    """``(performance, minimum cost)`` pairs along the expansion path."""
    path = trace_expansion_path(params, cm, region, pi_levels)
    return [(p.pi, p.cost) for p in path]
