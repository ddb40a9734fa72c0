"""Property-based invariants of the closed-form model (200 generated cases each)."""

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from perffunc.analysis import classify_mt_trend
from perffunc.core import (
    AmueParams,
    CostModel,
    RealizableRegion,
    amue_eval,
    isoperf_m_of_t,
    isoperf_slope,
    min_cost_curve,
    tangency_point,
    trace_expansion_path,
)

coef = st.floats(0.05, 10.0)
alpha = st.floats(0.05, 0.9)


@st.composite
def params(draw):
    return AmueParams(draw(st.floats(0.0, 60.0)), draw(coef), draw(alpha), draw(coef), draw(alpha))


@st.composite
def costs(draw):
    return CostModel.from_ratio(draw(st.floats(1e-3, 1.0)), draw(st.floats(1e-3, 1.0)))


gain = st.floats(1.0, 40.0)
size = st.floats(0.0, 1e5)


@given(params(), size, size, st.floats(1e-3, 1e3))
def test_eval_monotone(p, t, m, step):
    base = amue_eval(p, t, m)
    assert amue_eval(p, t + step, m) >= base
    assert amue_eval(p, t, m + step) >= base


@given(params(), gain, st.floats(0.05, 20.0))
def test_isoperfs_never_cross(p, g, dg):
    lo, hi = p.a_zs + g, p.a_zs + g + dg
    t_end = ((lo - p.a_zs) / p.a_t) ** (1 / p.alpha_t)
    for t in np.linspace(0.0, min(t_end, 1e12), 25)[:-1]:
        m_lo = isoperf_m_of_t(p, lo, float(t))
        m_hi = isoperf_m_of_t(p, hi, float(t))
        assert m_lo is not None and m_hi is not None
        assert m_hi > m_lo


@given(params(), gain, st.floats(0.0, 0.999))
def test_isoperf_round_trip(p, g, frac):
    pi = p.a_zs + g
    t_end = ((pi - p.a_zs) / p.a_t) ** (1 / p.alpha_t)
    t = frac * t_end
    assume(np.isfinite(t) and t < 1e15)
    m = isoperf_m_of_t(p, pi, t)
    assume(m is not None and m < 1e15)
    assert abs(amue_eval(p, t, m) - pi) <= 1e-9 * max(1.0, pi)


def _interior_tangency(p, cm, g):
    q = tangency_point(p, cm, p.a_zs + g)
    assume(1e-6 < q.t < 1e15 and 1e-6 < q.m < 1e15)
    return q


@given(params(), costs(), gain)
def test_tangency_slope_condition(p, cm, g):
    q = _interior_tangency(p, cm, g)
    assert abs(isoperf_slope(p, q.t, q.m) - cm.isocost_slope) <= 1e-6 * abs(cm.isocost_slope)


@given(params(), costs(), gain)
def test_cost_contribution_ratio(p, cm, g):
    # at the optimum the spend ratio equals the ratio of elasticity-weighted contributions
    q = _interior_tangency(p, cm, g)
    spend = (cm.c_t * q.t) / (cm.c_m * q.m)
    contrib = (p.alpha_t * p.a_t * q.t**p.alpha_t) / (p.alpha_m * p.a_m * q.m**p.alpha_m)
    assert abs(spend - contrib) <= 1e-6 * contrib


@given(params(), costs(), gain, st.floats(0.05, 5.0))
def test_path_cost_monotone(p, cm, g0, width):
    levels = list(np.linspace(p.a_zs + g0, p.a_zs + g0 + width * 10, 10))
    path = trace_expansion_path(p, cm, RealizableRegion(5000.0), levels)
    c = path.cost
    assert np.all(np.diff(c) > 0)


@given(params(), costs(), gain, st.floats(0.5, 5.0))
def test_trend_matches_sampled_path(p, cm, g0, width):
    trend = classify_mt_trend(p)
    assume(trend.label != "constant")
    levels = list(np.linspace(p.a_zs + g0, p.a_zs + g0 + width * 10, 10))
    path = trace_expansion_path(p, cm, RealizableRegion(), levels)
    assume(np.all((path.t > 1e-9) & (path.t < 1e15) & (path.m > 1e-9) & (path.m < 1e15)))
    ratio = path.m / path.t
    d = np.diff(np.log(ratio))
    if trend.label == "increasing":
        assert np.all(d > 0)
    else:
        assert np.all(d < 0)


@given(params(), costs(), gain, st.floats(0.5, 5.0))
def test_diminishing_returns_on_interior_segments(p, cm, g0, width):
    levels = np.linspace(p.a_zs + g0, p.a_zs + g0 + width * 10, 10)
    curve = min_cost_curve(p, cm, RealizableRegion(), levels)
    pi = np.array([a for a, _ in curve])
    c = np.array([b for _, b in curve])
    gains = np.diff(pi) / np.diff(c)
    assert np.all(np.diff(gains) <= 1e-9 * gains[:-1])
