"""Synthetic observation sets drawn from a known AMUE surface."""

import numpy as np

from perffunc.core import AmueParams, amue_eval
from perffunc.ingest import ExperimentContext, ObservationSet

TRUE_PARAMS = AmueParams(a_zs=45.0, a_t=0.6, alpha_t=0.35, a_m=1.8, alpha_m=0.3)


def grid_set(params=TRUE_PARAMS, ts=None, ms=None, noise=0.0, seed=0, language="sw", pivot=3696.0):
    ts = np.array([0, 100, 400, 900, 1600, 2500, 3696.0]) if ts is None else np.asarray(ts, float)
    ms = np.array([0, 100, 400, 900, 1600, 2500, 3600.0]) if ms is None else np.asarray(ms, float)
    T, M = np.meshgrid(ts, ms)
    T, M = T.ravel(), M.ravel()
    y = amue_eval(params, T, M) + np.random.default_rng(seed).normal(0.0, noise, T.size)
    return ObservationSet.from_arrays(ExperimentContext(language, pivot), T, M, np.clip(y, 0, 100))


def random_set(n, params=TRUE_PARAMS, noise=0.0, seed=0, t_max=3696.0, m_max=5000.0, language="sw", pivot=3696.0):
    rng = np.random.default_rng(seed)
    t = np.round(rng.uniform(0, t_max, n))
    m = np.round(rng.uniform(0, m_max, n))
    y = amue_eval(params, t, m) + rng.normal(0.0, noise, n)
    return ObservationSet.from_arrays(ExperimentContext(language, pivot), t, m, np.clip(y, 0, 100))
