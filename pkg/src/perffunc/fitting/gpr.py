"""Gaussian-process performance function with an RBF + white-noise kernel.

Inputs ``(t, m)`` are divided by the largest data size in the training set
so that one length scale is meaningful for both axes.  Targets are centred
on their mean, which is also the prior mean used far from the data.

Hyperparameters ``(length_scale, signal_variance, noise_variance)`` are fitted
in log space by maximising the log marginal likelihood with L-BFGS-B from
several random starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from ..errors import FitError, IllConditionedError
from ..ingest import ObservationSet
from .amue import FitOptions

LENGTH_SCALE_BOUNDS = (1e-2, 1e2)
SIGNAL_BOUNDS_REL = (1e-2, 1e2)
NOISE_FLOOR_REL = 1e-6
NOISE_CEIL_REL = 1e1
MAX_JITTER_REL = 1e-2


@dataclass(frozen=True, eq=False)
class GprModel:
    """A fitted GP with its training factorisation.

    ``length_scale`` is a scalar, or one value per input dimension when the
    model was fitted with ``ard=True``.  ``noise_variance`` includes any jitter
    that was needed to factorise the kernel matrix.
    """

    length_scale: float | np.ndarray
    signal_variance: float
    noise_variance: float
    training_inputs: np.ndarray
    input_scale: float
    y_mean: float
    dual_weights: np.ndarray
    chol_factor: np.ndarray
    log_marginal_likelihood: float = float("nan")

    def as_dict(self) -> dict:
        ls = self.length_scale
        return {
            "length_scale": ls.tolist() if isinstance(ls, np.ndarray) else ls,
            "signal_variance": self.signal_variance,
            "noise_variance": self.noise_variance,
            "input_scale": self.input_scale,
            "prior_mean": self.y_mean,
            "n_train": int(self.training_inputs.shape[0]),
            "log_marginal_likelihood": self.log_marginal_likelihood,
        }


def _sqdist(A: np.ndarray, B: np.ndarray, ls) -> np.ndarray:
    A = A / ls
    B = B / ls
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def rbf(A: np.ndarray, B: np.ndarray, length_scale, signal_variance: float) -> np.ndarray:
    return signal_variance * np.exp(-0.5 * _sqdist(A, B, length_scale))


def _factor(K: np.ndarray, noise: float, scale: float) -> tuple[np.ndarray, float]:
    """Cholesky of ``K + noise*I``, escalating extra jitter by 10x on failure."""
    n = K.shape[0]
    jitter = 0.0
    step = NOISE_FLOOR_REL * scale
    while True:
        try:
            L = cholesky(K + (noise + jitter) * np.eye(n), lower=True, check_finite=False)
            return L, noise + jitter
        except np.linalg.LinAlgError:
            jitter = step if jitter == 0.0 else jitter * 10.0
            if jitter > MAX_JITTER_REL * scale:
                raise IllConditionedError(
                    "kernel matrix is not positive definite even with maximal jitter"
                ) from None


def log_marginal_likelihood(theta, X: np.ndarray, y: np.ndarray, ard: bool = False, scale: float = 1.0):
    """Log marginal likelihood and its gradient w.r.t. the log hyperparameters.

    ``theta`` is ``[log l, log s2, log n2]`` (or ``[log l_1, ..., log l_d,
    log s2, log n2]`` with ``ard``).  ``y`` must already be centred; ``X``
    already normalised.
    """
    theta = np.asarray(theta, dtype=float)
    d = X.shape[1]
    n_ls = d if ard else 1
    ls = np.exp(theta[:n_ls])
    s2 = math.exp(theta[n_ls])
    n2 = math.exp(theta[n_ls + 1])
    Kf = rbf(X, X, ls, s2)
    L, _ = _factor(Kf, n2, scale)
    alpha = cho_solve((L, True), y)
    lml = -0.5 * float(y @ alpha) - float(np.log(np.diag(L)).sum()) - 0.5 * len(y) * math.log(2 * math.pi)
    W = np.outer(alpha, alpha) - cho_solve((L, True), np.eye(len(y)))
    grad = np.empty_like(theta)
    if ard:
        for k in range(d):
            D = (X[:, k : k + 1] - X[:, k : k + 1].T) ** 2 / ls[k] ** 2
            grad[k] = 0.5 * float((W * (Kf * D)).sum())
    else:
        D = _sqdist(X, X, ls)
        grad[0] = 0.5 * float((W * (Kf * D)).sum())
    grad[n_ls] = 0.5 * float((W * Kf).sum())
    grad[n_ls + 1] = 0.5 * n2 * float(np.trace(W))
    return lml, grad


def _prepare(t, m, y):
    X_raw = np.column_stack([np.asarray(t, dtype=float), np.asarray(m, dtype=float)])
    y = np.asarray(y, dtype=float)
    scale = float(X_raw.max()) if X_raw.size and X_raw.max() > 0 else 1.0
    var = float(y.var())
    if not var > 0:
        var = 1.0
    return X_raw, X_raw / scale, y, scale, var


def _bounds(var: float, ard: bool, d: int = 2):
    n_ls = d if ard else 1
    ls = [tuple(math.log(b) for b in LENGTH_SCALE_BOUNDS)] * n_ls
    s2 = (math.log(SIGNAL_BOUNDS_REL[0] * var), math.log(SIGNAL_BOUNDS_REL[1] * var))
    n2 = (math.log(NOISE_FLOOR_REL * var), math.log(NOISE_CEIL_REL * var))
    return ls + [s2, n2]


def build_gpr(
    t,
    m,
    y,
    length_scale,
    signal_variance: float,
    noise_variance: float,
    input_scale: float | None = None,
) -> GprModel:
    """Factorise a GP with fixed hyperparameters.

    ``noise_variance`` is raised to the noise floor when below it.
    """
    X_raw, X, y, scale, var = _prepare(t, m, y)
    if input_scale is not None:
        scale = float(input_scale)
        X = X_raw / scale
    if np.any(np.asarray(length_scale) <= 0) or not signal_variance > 0:
        raise ValueError("length_scale and signal_variance must be positive")
    noise = max(float(noise_variance), NOISE_FLOOR_REL * var)
    y_mean = float(y.mean())
    yc = y - y_mean
    K = rbf(X, X, length_scale, signal_variance)
    L, noise = _factor(K, noise, var)
    alpha = cho_solve((L, True), yc)
    lml = -0.5 * float(yc @ alpha) - float(np.log(np.diag(L)).sum()) - 0.5 * len(y) * math.log(2 * math.pi)
    ls = np.asarray(length_scale, dtype=float)
    return GprModel(
        length_scale=float(ls) if ls.ndim == 0 else ls.copy(),
        signal_variance=float(signal_variance),
        noise_variance=noise,
        training_inputs=X_raw,
        input_scale=scale,
        y_mean=y_mean,
        dual_weights=alpha,
        chol_factor=L,
        log_marginal_likelihood=lml,
    )


def fit_gpr_arrays(t, m, y, options: FitOptions | None = None, ard: bool = False) -> GprModel:
    options = options or FitOptions()
    if np.size(y) == 0:
        raise FitError("cannot fit a GP to zero observations")
    X_raw, X, y, scale, var = _prepare(t, m, y)
    yc = y - y.mean()
    bounds = _bounds(var, ard, X.shape[1])
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    rng = np.random.default_rng(options.rng_seed)

    # first start: unit length scale, signal = target variance, 1% noise
    n_ls = len(bounds) - 2
    x0 = np.array([0.0] * n_ls + [math.log(var), math.log(1e-2 * var)])
    starts = [np.clip(x0, lo, hi)] + [rng.uniform(lo, hi) for _ in range(options.restarts - 1)]

    def objective(theta):
        try:
            lml, grad = log_marginal_likelihood(theta, X, yc, ard=ard, scale=var)
        except IllConditionedError:
            return 1e25, np.zeros_like(theta)
        return -lml, -grad

    best = None
    for i, s in enumerate(starts):
        res = minimize(
            objective,
            s,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": options.max_iterations},
        )
        if best is None or res.fun < best[0]:
            best = (float(res.fun), res.x)
    theta = best[1]
    ls = np.exp(theta[:n_ls])
    return build_gpr(
        X_raw[:, 0],
        X_raw[:, 1],
        y,
        float(ls[0]) if not ard else ls,
        float(np.exp(theta[n_ls])),
        float(np.exp(theta[n_ls + 1])),
        input_scale=scale,
    )


def fit_gpr(obs: ObservationSet, options: FitOptions | None = None, ard: bool = False) -> GprModel:
    """Fit the GP hyperparameters to one experiment context.

    ``ard=True`` gives the T and M axes separate length scales.
    """
    return fit_gpr_arrays(obs.t, obs.m, obs.pi, options, ard=ard)


def gpr_predict(model: GprModel, t, m, include_noise: bool = True):
    """Posterior mean and variance at ``(t, m)``.

    With ``include_noise`` the variance is that of a new observation, i.e.
    the latent variance plus ``noise_variance``.
    """
    t_arr, m_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(m, dtype=float))
    shape = t_arr.shape
    Xs = np.column_stack([t_arr.ravel(), m_arr.ravel()]) / model.input_scale
    X = model.training_inputs / model.input_scale
    Ks = rbf(Xs, X, model.length_scale, model.signal_variance)
    mean = model.y_mean + Ks @ model.dual_weights
    v = solve_triangular(model.chol_factor, Ks.T, lower=True, check_finite=False)
    var = np.maximum(model.signal_variance - (v * v).sum(0), 0.0)
    if include_noise:
        var = var + model.noise_variance
    mean = mean.reshape(shape)
    var = var.reshape(shape)
    if mean.ndim == 0:
        return float(mean), float(var)
    return mean, var
