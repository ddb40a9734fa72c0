"""Bounded nonlinear least squares for the AMUE performance function.

Bounds are enforced by reparameterisation rather than projection:
coefficients are ``exp(u)`` and elasticities ``ALPHA_MAX * sigmoid(v)``, so
the Levenberg-Marquardt iteration runs unconstrained on ``(u, v)`` and every
iterate maps back to valid :class:`~perffunc.core.AmueParams`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ..core import ALPHA_MAX, AmueParams
from ..errors import FitError
from ..ingest import ObservationSet
from .metrics import FitReport, evaluate_fit

N_PARAMS = 5
MIN_OBSERVATIONS = 5

# clamps on the unconstrained coordinates; keep exp/sigmoid finite
_U_MIN, _U_MAX = -50.0, 15.0
_V_MIN, _V_MAX = -40.0, 40.0


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 500
    tolerance: float = 1e-12
    restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    n_iter: int
    converged: bool
    history: list[float] = field(default_factory=list)


def levenberg_marquardt(residual_and_jac, x0, max_iterations=500, tolerance=1e-12, bounds=None):
    """Minimise ``0.5 * ||r(x)||^2`` with Marquardt-scaled damping.

    ``residual_and_jac(x)`` returns ``(r, J)`` with ``J = dr/dx``.
    ``history`` holds the cost after every accepted step (starting with the
    initial cost), so it is non-increasing by construction.
    ``bounds`` is an optional ``(lower, upper)`` pair of arrays used to clip
    trial points.
    """
    x = np.array(x0, dtype=float)
    if bounds is not None:
        x = np.clip(x, *bounds)
    r, J = residual_and_jac(x)
    cost = 0.5 * float(r @ r)
    history = [cost]
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        g = J.T @ r
        A = J.T @ J
        diag = np.maximum(np.diag(A), 1e-12 * max(1.0, float(np.max(np.diag(A)))))
        accepted = False
        while lam < 1e20:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = x + step
            if bounds is not None:
                x_new = np.clip(x_new, *bounds)
            r_new, J_new = residual_and_jac(x_new)
            cost_new = 0.5 * float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            converged = True  # no descent direction left at machine precision
            break
        decrease = cost - cost_new
        small_step = np.linalg.norm(x_new - x) <= tolerance * (np.linalg.norm(x) + tolerance)
        x, r, J, cost = x_new, r_new, J_new, cost_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        if decrease <= tolerance * cost or small_step or cost == 0.0:
            converged = True
            break
    return LMResult(x=x, cost=cost, n_iter=it, converged=converged, history=history)


def _sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


def _logit(p):
    return np.log(p / (1.0 - p))


def to_unconstrained(params: AmueParams) -> np.ndarray:
    coef = np.log(np.maximum([params.a_zs, params.a_t, params.a_m], np.exp(_U_MIN)))
    al = np.clip(np.array([params.alpha_t, params.alpha_m]) / ALPHA_MAX, 1e-12, 1 - 1e-12)
    v = _logit(al)
    return np.array([coef[0], coef[1], v[0], coef[2], v[1]])


def from_unconstrained(x: np.ndarray) -> AmueParams:
    a_zs, a_t, a_m = np.exp([x[0], x[1], x[3]])
    alpha_t, alpha_m = ALPHA_MAX * _sigmoid(np.array([x[2], x[4]]))
    return AmueParams(float(a_zs), float(a_t), float(alpha_t), float(a_m), float(alpha_m))


def _make_residual(t: np.ndarray, m: np.ndarray, y: np.ndarray):
    pos_t = t > 0
    pos_m = m > 0
    log_t = np.zeros_like(t)
    log_m = np.zeros_like(m)
    log_t[pos_t] = np.log(t[pos_t])
    log_m[pos_m] = np.log(m[pos_m])

    def residual_and_jac(x):
        a_zs, a_t, a_m = np.exp([x[0], x[1], x[3]])
        s_t, s_m = _sigmoid(x[2]), _sigmoid(x[4])
        alpha_t, alpha_m = ALPHA_MAX * s_t, ALPHA_MAX * s_m
        pt = np.where(pos_t, np.exp(alpha_t * log_t), 0.0)
        pm = np.where(pos_m, np.exp(alpha_m * log_m), 0.0)
        f = a_zs + a_t * pt + a_m * pm
        J = np.empty((len(y), N_PARAMS))
        J[:, 0] = a_zs
        J[:, 1] = a_t * pt
        J[:, 2] = a_t * pt * log_t * ALPHA_MAX * s_t * (1 - s_t)
        J[:, 3] = a_m * pm
        J[:, 4] = a_m * pm * log_m * ALPHA_MAX * s_m * (1 - s_m)
        # residual is y - f, so dr/dx = -df/dx
        return y - f, -J

    return residual_and_jac


def _heuristic_start(t, m, y) -> AmueParams:
    a_zs = max(float(y.min()), 1e-3)
    alpha = 0.5

    def coef(x, other):
        sel = (other == 0) & (x > 0)
        if not sel.any():
            sel = x > 0
        if not sel.any():
            return 1e-2
        i = np.argmax(np.where(sel, x, -1.0))
        gain = float(y[i] - a_zs)
        return max(gain, 1e-2) / x[i] ** alpha

    return AmueParams(a_zs, coef(t, m), alpha, coef(m, t), alpha)


def _lhs_starts(n: int, y: np.ndarray, rng: np.random.Generator) -> list[AmueParams]:
    if n <= 0:
        return []
    sample = qmc.LatinHypercube(d=N_PARAMS, seed=rng).random(n)
    y_hi = max(float(y.max()), 1.0)
    lo = np.array([1e-3, np.log(1e-3), 0.05, np.log(1e-3), 0.05])
    hi = np.array([y_hi, np.log(10.0), 0.9, np.log(10.0), 0.9])
    pts = lo + sample * (hi - lo)
    return [
        AmueParams(float(p[0]), float(np.exp(p[1])), float(p[2]), float(np.exp(p[3])), float(p[4]))
        for p in pts
    ]


def _check_inputs(t, m, y):
    if len(y) < MIN_OBSERVATIONS:
        raise FitError(
            f"need at least {MIN_OBSERVATIONS} observations to fit {N_PARAMS} parameters, got {len(y)}"
        )
    if np.unique(np.column_stack([t, m]), axis=0).shape[0] == 1:
        raise FitError("all observations share the same (t, m); the fit is rank deficient")


def fit_amue_arrays(t, m, y, options: FitOptions | None = None) -> tuple[AmueParams, list[LMResult]]:
    """Fit on raw arrays; returns the best parameters and every restart's result."""
    options = options or FitOptions()
    t, m, y = (np.asarray(a, dtype=float).ravel() for a in (t, m, y))
    _check_inputs(t, m, y)
    rng = np.random.default_rng(options.rng_seed)
    starts = [_heuristic_start(t, m, y)] + _lhs_starts(options.restarts - 1, y, rng)
    fun = _make_residual(t, m, y)
    lower = np.array([_U_MIN, _U_MIN, _V_MIN, _U_MIN, _V_MIN])
    upper = np.array([_U_MAX, _U_MAX, _V_MAX, _U_MAX, _V_MAX])
    results = [
        levenberg_marquardt(
            fun,
            to_unconstrained(p0),
            max_iterations=options.max_iterations,
            tolerance=options.tolerance,
            bounds=(lower, upper),
        )
        for p0 in starts
    ]
    best = min(range(len(results)), key=lambda i: (results[i].cost, i))
    return from_unconstrained(results[best].x), results


def fit_amue(obs: ObservationSet, options: FitOptions | None = None) -> tuple[AmueParams, FitReport]:
    """Least-squares AMUE parameters for one experiment context.

    The best of ``options.restarts`` Levenberg-Marquardt runs is kept: one
    from a data-driven guess, the rest from a Latin hypercube over a
    plausible parameter box.
    """
    params, _ = fit_amue_arrays(obs.t, obs.m, obs.pi, options)
    return params, evaluate_fit(params, obs, split="train")
