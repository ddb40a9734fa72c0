"""Acceptance criteria, one check per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``;
either way each criterion prints a single PASS or FAIL line.
"""

import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from perffunc.analysis import isoperf_bundle  # noqa: E402
from perffunc.core import (  # noqa: E402
    AmueParams,
    CostModel,
    RealizableRegion,
    amue_eval,
    approximate_path_slope,
    expansion_path_m_of_t,
    least_cost_point,
    tangency_point,
    trace_expansion_path,
)
from perffunc.fitting import FitOptions, evaluate_fit, fit_amue, fit_gpr_arrays, gpr_predict  # noqa: E402
from perffunc.fitting.gpr import build_gpr, log_marginal_likelihood  # noqa: E402
from perffunc.render import TmDiagramSpec, Transform, isocosts_for_path, render_tm_diagram  # noqa: E402
from perffunc.tables import published_params  # noqa: E402
from svgcheck import data_slope, dist_to_line, dist_to_polyline, elements, line_ends, parse, polyline_points  # noqa: E402
from synth import grid_set, random_set  # noqa: E402

RECOVERY_PARAMS = AmueParams(40.0, 0.5, 0.4, 2.0, 0.3)


def _report(n, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    return ok


# 1 ---------------------------------------------------------------------------


def criterion_1():
    sw = published_params("sw", 3696)
    s1 = approximate_path_slope(sw, CostModel.from_ratio(0.007, 0.1))
    s2 = approximate_path_slope(sw, CostModel.from_ratio(0.007, 0.01))
    ok = abs(s1 - 3.2) <= 0.15 and abs(s2 - 0.08) <= 0.01
    return ok, f"sw slope {s1:.4f} at ratio 0.1, {s2:.4f} at ratio 0.01"


# 2 ---------------------------------------------------------------------------

GRID_MAX = 50_000


def brute_force(p, cm, pi_c):
    """Cheapest unit-grid column on the feasible set over [0, GRID_MAX]^2.

    For every integer t the smallest feasible m is found by bisection, which is
    the same answer an exhaustive sweep of m would give in the limit of a fine
    grid and avoids a 2.5e9 cell array.
    """
    t = np.arange(GRID_MAX + 1, dtype=float)
    lo = np.zeros_like(t)
    hi = np.full_like(t, float(GRID_MAX))
    reachable = amue_eval(p, t, hi) >= pi_c
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        up = amue_eval(p, t, mid) >= pi_c
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    hi = np.where(amue_eval(p, t, np.zeros_like(t)) >= pi_c, 0.0, hi)
    cost = np.where(reachable, cm.c_t * t + cm.c_m * hi, np.inf)
    k = int(np.argmin(cost))
    return t[k], hi[k], cost[k]


def tangency_cases(n, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = AmueParams(
            rng.uniform(20, 60), rng.uniform(0.05, 3), rng.uniform(0.15, 0.8), rng.uniform(0.3, 5), rng.uniform(0.15, 0.8)
        )
        cm = CostModel.from_ratio(rng.uniform(0.005, 1), 10 ** rng.uniform(-2, 0))
        t_star = 10 ** rng.uniform(2.3, 4.5)
        m_star = float(expansion_path_m_of_t(p, cm, t_star))
        if not 200 <= m_star <= 4e4:
            continue
        out.append((p, cm, float(amue_eval(p, t_star, m_star))))
    return out


def criterion_2():
    start = time.perf_counter()
    worst_cost, misses = 0.0, 0
    for p, cm, pi_c in tangency_cases(50):
        q = least_cost_point(p, cm, RealizableRegion(), pi_c)
        gt, gm, gc = brute_force(p, cm, pi_c)
        worst_cost = max(worst_cost, abs(gc - q.cost) / q.cost)
        if abs(gt - q.t) > 1 or abs(gm - q.m) > 1:
            misses += 1
    elapsed = time.perf_counter() - start
    ok = worst_cost <= 5e-3 and misses == 0 and elapsed < 120
    return ok, f"50 cases, worst cost gap {worst_cost:.2e}, {misses} outside one cell, {elapsed:.1f}s"


# 3 ---------------------------------------------------------------------------


def criterion_3():
    rng = np.random.default_rng(11)
    checked = bad = 0
    for p, cm, pi_c in tangency_cases(40, seed=3):
        free = tangency_point(p, cm, pi_c)
        region = RealizableRegion(free.t * rng.uniform(0.1, 0.9))
        q = least_cost_point(p, cm, region, pi_c)
        if not (q.t == region.p_max and q.on_boundary and q.cost >= free.cost * (1 - 1e-12)):
            bad += 1
        if abs(amue_eval(p, q.t, q.m) - pi_c) > 1e-8 * pi_c:
            bad += 1
        checked += 1
        if checked == 20:
            break
    return bad == 0, f"{checked} boundary cases, {bad} violations"


# 4 ---------------------------------------------------------------------------


def criterion_4():
    ts = [0, 100, 400, 900, 1600, 2500, 3696.0]
    params, _ = fit_amue(grid_set(RECOVERY_PARAMS, ts=ts))
    truth = RECOVERY_PARAMS.as_dict()
    worst = max(abs(params.as_dict()[k] - v) / v for k, v in truth.items())
    train = random_set(100, RECOVERY_PARAMS, noise=0.5, seed=3)
    test = random_set(50, RECOVERY_PARAMS, noise=0.5, seed=4)
    noisy, _ = fit_amue(train)
    rmse = evaluate_fit(noisy, test, "test").rmse
    ok = worst <= 1e-3 and rmse <= 0.75
    return ok, f"noise-free worst relative error {worst:.1e}, noisy held-out RMSE {rmse:.3f}"


# 5 ---------------------------------------------------------------------------


def _fd(theta, X, y, h=1e-5):
    g = np.empty_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        g[k] = (log_marginal_likelihood(theta + e, X, y)[0] - log_marginal_likelihood(theta - e, X, y)[0]) / (2 * h)
    return g


def criterion_5():
    rng = np.random.default_rng(21)
    worst_grad = 0.0
    for _ in range(20):
        n = int(rng.integers(5, 40))
        X = rng.uniform(0, 1, (n, 2))
        y = np.sin(4 * X[:, 0]) * X[:, 1] + rng.normal(0, 0.05, n)
        y -= y.mean()
        theta = rng.uniform([-2.0, -1.0, -6.0], [0.5, 1.0, -1.0])
        _, grad = log_marginal_likelihood(theta, X, y)
        fd = _fd(theta, X, y)
        worst_grad = max(worst_grad, np.linalg.norm(grad - fd) / np.linalg.norm(fd))

    # noise-free targets, noise term pinned at its floor: the posterior mean
    # misses each target by exactly noise * dual weight, which is the only
    # shrinkage a GP with a positive noise floor allows
    obs = random_set(30, seed=2, t_max=3000, m_max=3000)
    fitted = fit_gpr_arrays(obs.t, obs.m, obs.pi, FitOptions(restarts=3))
    pinned = build_gpr(obs.t, obs.m, obs.pi, fitted.length_scale, fitted.signal_variance, 0.0)
    miss = obs.pi - gpr_predict(pinned, obs.t, obs.m, include_noise=False)[0]
    identity = np.max(np.abs(miss - pinned.noise_variance * pinned.dual_weights))
    single = fit_gpr_arrays([120.0], [40.0], [63.5])
    resid1 = abs(gpr_predict(single, 120.0, 40.0, include_noise=False)[0] - 63.5)
    ok = worst_grad <= 1e-4 and resid1 <= 1e-6 and identity <= 1e-9
    return ok, (
        f"gradient worst relative error {worst_grad:.1e} over 20 datasets; "
        f"single-point interpolation error {resid1:.1e}; "
        f"30-point residual {np.max(np.abs(miss)):.1e} equals noise shrinkage to {identity:.1e}"
    )


# 6 ---------------------------------------------------------------------------

INVARIANTS = (
    "test_eval_monotone",
    "test_isoperfs_never_cross",
    "test_isoperf_round_trip",
    "test_tangency_slope_condition",
    "test_trend_matches_sampled_path",
    "test_cost_contribution_ratio",
    "test_path_cost_monotone",
    "test_diminishing_returns_on_interior_segments",
)


def criterion_6():
    import conftest  # noqa: F401  registers the 200-example profile
    import test_invariants

    failed = []
    for name in INVARIANTS:
        try:
            getattr(test_invariants, name)()
        except Exception as exc:  # hypothesis re-raises the falsifying example
            failed.append(f"{name}: {type(exc).__name__}")
    detail = f"{len(INVARIANTS) - len(failed)}/{len(INVARIANTS)} property suites held over 200 cases each"
    if failed:
        detail += "; " + ", ".join(failed)
    return not failed, detail


# 7 ---------------------------------------------------------------------------


def criterion_7():
    return None, "released performance data not available; criteria 1-6 stand as acceptance"


# 8 ---------------------------------------------------------------------------


def criterion_8():
    sw = published_params("sw", 3696, 50.0)
    cm = CostModel.from_ratio(0.007, 0.1)
    region = RealizableRegion(3696.0)
    levels = [55.0, 60.0, 65.0, 70.0, 75.0]
    t_range, m_range = (0.0, 5000.0), (0.0, 8000.0)
    path = trace_expansion_path(sw, cm, region, levels)
    spec = TmDiagramSpec(
        contours=isoperf_bundle(sw, levels, t_range[1], 400),
        isocosts=isocosts_for_path(path, cm),
        path=path,
        region=region,
        t_range=t_range,
        m_range=m_range,
        title="sw",
    )
    root = parse(render_tm_diagram(spec))
    tr = Transform(*t_range, *m_range)
    problems = []

    if len(elements(root, "rect", "realizable-region")) != 1:
        problems.append("no shaded region")

    contours = {}
    for e in elements(root, "polyline", "isoperf"):
        contours.setdefault(float(e.get("data-level")), []).append(polyline_points(e))
    if len(contours) < 4:
        problems.append("fewer than 4 contours")
    # pixel y grows downwards, so higher levels sit strictly above lower ones
    grid = np.linspace(tr.left + 1, tr.right - 1, 200)
    stacked = []
    for lvl in sorted(contours):
        pts = np.vstack(contours[lvl])
        order = np.argsort(pts[:, 0])
        stacked.append(np.interp(grid, pts[order, 0], pts[order, 1], left=np.nan, right=np.nan))
    for lo, hi in zip(stacked, stacked[1:]):
        both = ~np.isnan(lo) & ~np.isnan(hi)
        if np.any(hi[both] >= lo[both]):
            problems.append("contours cross")

    isocosts = [line_ends(e) for e in elements(root, "line", "isocost")]
    slopes = [data_slope(tr, ends) for ends in isocosts]
    if len(slopes) < 2 or not np.allclose(slopes, cm.isocost_slope, rtol=1e-3):
        problems.append("isocosts not parallel")

    if len(elements(root, "polyline", "expansion-path")) != 1:
        problems.append("no expansion path")
    worst = 0.0
    for c in elements(root, "circle", "tangency"):
        p = np.array([float(c.get("cx")), float(c.get("cy"))])
        d1 = min(dist_to_polyline(p, pts) for pts in contours[float(c.get("data-pi"))])
        d2 = min(dist_to_line(p, *ends) for ends in isocosts)
        worst = max(worst, d1, d2)
    if worst > 0.5:
        problems.append(f"marker off by {worst:.2f}px")

    ok = not problems
    detail = f"{len(contours)} contours, {len(slopes)} isocosts, worst marker offset {worst:.3f}px"
    return ok, detail + ("" if ok else "; " + ", ".join(problems))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    if ok is None:
        print(f"SKIP criterion {n}: {detail}")
        pytest.skip(detail)
    assert _report(n, ok, detail), detail


if __name__ == "__main__":
    results = []
    for n, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        if ok is None:
            print(f"SKIP criterion {n}: {detail}")
            continue
        results.append(_report(n, ok, detail))
    sys.exit(0 if all(results) else 1)
