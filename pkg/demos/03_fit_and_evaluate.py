"""Fit both performance functions to noisy synthetic runs and score them.

The data come from a known additive surface plus noise, so the recovered
coefficients can be compared with the truth.
"""

# %% simulate an experiment grid
import numpy as np

from perffunc.core import AmueParams, amue_eval
from perffunc.fitting import FitOptions, evaluate_fit, fit_amue, fit_gpr, gpr_predict, split_train_test
from perffunc.ingest import ExperimentContext, ObservationSet

truth = AmueParams(a_zs=42.0, a_t=0.8, alpha_t=0.33, a_m=1.5, alpha_m=0.35)
rng = np.random.default_rng(0)
T, M = np.meshgrid([0, 50, 200, 500, 1000, 2000, 3696], [0, 25, 100, 250, 500, 1000, 2500, 5000])
T, M = T.ravel().astype(float), M.ravel().astype(float)
pi = np.clip(amue_eval(truth, T, M) + rng.normal(0, 1.0, T.size), 0, 100)
obs = ObservationSet.from_arrays(ExperimentContext("sw", 3696.0), T, M, pi)
print(f"{len(obs)} configurations")

# %% hold out a fifth of the configurations
train, test = split_train_test(obs, 0.8, rng_seed=1)
opts = FitOptions(restarts=10, rng_seed=1)

# %% parametric fit
params, train_report = fit_amue(train, opts)
print("true  :", truth.as_dict())
print("fitted:", {k: round(v, 4) for k, v in params.as_dict().items()})
amue_test = evaluate_fit(params, test, "test")
print(f"additive model test RMSE {amue_test.rmse:.3f}, r2 {amue_test.r2:.3f}")

# %% nonparametric fit
gp = fit_gpr(train, opts)
mean, var = gpr_predict(gp, test.t, test.m)
rmse = float(np.sqrt(np.mean((mean - test.pi) ** 2)))
print(f"GP test RMSE {rmse:.3f}; mean predictive sd {np.sqrt(var).mean():.3f}")

# %% per-setup breakdown on the training split
for label, rep in train_report.per_setup.items():
    print(f"  {label:15s} n={rep.n:3d} rmse={rep.rmse:.3f}")
