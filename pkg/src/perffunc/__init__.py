"""Performance functions for mixing translated and manually labelled training data."""

from .analysis import GridSpec, classify_mt_trend, compare_isoperfs, gpr_isoperf_contour, gpr_least_cost_point
from .core import (
    AmueParams,
    CostModel,
    ExpansionPath,
    OperatingPoint,
    RealizableRegion,
    amue_eval,
    least_cost_point,
    min_cost_curve,
    tangency_point,
    trace_expansion_path,
)
from .errors import PerfFuncError
from .fitting import FitOptions, FitReport, GprModel, evaluate_fit, fit_amue, fit_gpr, gpr_predict, split_train_test
from .ingest import ExperimentContext, ObservationSet, load_observations
from .render import TmDiagramSpec, render_cost_curve, render_tm_diagram
from .tables import published_params

__version__ = "0.1.0"

__all__ = [
    "AmueParams",
    "CostModel",
    "ExpansionPath",
    "ExperimentContext",
    "FitOptions",
    "FitReport",
    "GprModel",
    "GridSpec",
    "ObservationSet",
    "OperatingPoint",
    "PerfFuncError",
    "RealizableRegion",
    "TmDiagramSpec",
    "amue_eval",
    "classify_mt_trend",
    "compare_isoperfs",
    "evaluate_fit",
    "fit_amue",
    "fit_gpr",
    "gpr_isoperf_contour",
    "gpr_least_cost_point",
    "gpr_predict",
    "least_cost_point",
    "load_observations",
    "min_cost_curve",
    "published_params",
    "render_cost_curve",
    "render_tm_diagram",
    "split_train_test",
    "tangency_point",
    "trace_expansion_path",
]
