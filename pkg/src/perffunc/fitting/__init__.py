"""Model fitting: AMUE least squares, Gaussian-process regression and fit metrics."""

from .amue import FitOptions, fit_amue, fit_amue_arrays, levenberg_marquardt
from .gpr import GprModel, fit_gpr, fit_gpr_arrays, gpr_predict, log_marginal_likelihood
from .metrics import FitReport, SetupMetrics, evaluate_fit, split_train_test

__all__ = [
    "FitOptions",
    "FitReport",
    "GprModel",
    "SetupMetrics",
    "evaluate_fit",
    "fit_amue",
    "fit_amue_arrays",
    "fit_gpr",
    "fit_gpr_arrays",
    "gpr_predict",
    "levenberg_marquardt",
    "log_marginal_likelihood",
    "split_train_test",
]
