"""Goodness-of-fit reporting and train/test splitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import AmueParams, amue_eval
from ..ingest import ObservationSet

SETUP_LABELS = ("zero-shot", "translate-train", "few-shot", "combined")


@dataclass(frozen=True)
class SetupMetrics:
    n: int
    rmse: float
    r2: float | None

    def as_dict(self) -> dict:
        return {"n": self.n, "rmse": self.rmse, "r2": self.r2}


@dataclass(frozen=True)
class FitReport:
    """RMSE and r^2 overall and per fine-tuning setup.

    ``r2`` is ``None`` when the targets have zero variance.
    """

    rmse: float
    r2: float | None
    n: int
    split: str = "train"
    per_setup: dict[str, SetupMetrics] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "split": self.split,
            "n": self.n,
            "rmse": self.rmse,
            "r2": self.r2,
            "per_setup": {k: v.as_dict() for k, v in self.per_setup.items()},
        }


def setup_label(t: float, m: float) -> str:
    if t == 0 and m == 0:
        return "zero-shot"
    if m == 0:
        return "translate-train"
    if t == 0:
        return "few-shot"
    return "combined"


def as_predictor(model) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Wrap :class:`AmueParams`, a fitted GPR model or a plain callable."""
    if isinstance(model, AmueParams):
        return lambda t, m: np.asarray(amue_eval(model, t, m), dtype=float)
    # imported lazily to keep metrics independent of the GPR module
    from .gpr import GprModel, gpr_predict

    if isinstance(model, GprModel):
        return lambda t, m: gpr_predict(model, t, m)[0]
    if callable(model):
        return lambda t, m: np.asarray(model(t, m), dtype=float)
    raise TypeError(f"cannot make a predictor from {type(model).__name__}")


def _metrics(y: np.ndarray, yhat: np.ndarray) -> tuple[float, float | None]:
    resid = y - yhat
    ss_res = float(resid @ resid)
    rmse = float(np.sqrt(ss_res / len(y)))
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = None if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return rmse, r2


def evaluate_fit(predictor, obs: ObservationSet, split: str = "train") -> FitReport:
    t, m, y = obs.t, obs.m, obs.pi
    yhat = np.asarray(as_predictor(predictor)(t, m), dtype=float)
    rmse, r2 = _metrics(y, yhat)
    labels = np.array([setup_label(a, b) for a, b in zip(t, m)])
    per_setup = {}
    for lab in SETUP_LABELS:
        sel = labels == lab
        if sel.any():
            r, q = _metrics(y[sel], yhat[sel])
            per_setup[lab] = SetupMetrics(int(sel.sum()), r, q)
    return FitReport(rmse=rmse, r2=r2, n=len(y), split=split, per_setup=per_setup)


def split_train_test(
    obs: ObservationSet,
    train_fraction: float = 0.8,
    rng_seed: int = 0,
) -> tuple[ObservationSet, ObservationSet]:
    """Shuffle configurations uniformly and cut them into train and test sets."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction!r}")
    n = len(obs)
    if n < 2:
        raise ValueError("need at least two observations to split")
    perm = np.random.default_rng(rng_seed).permutation(n)
    n_train = min(max(int(round(train_fraction * n)), 1), n - 1)
    return obs.subset(perm[:n_train].tolist()), obs.subset(perm[n_train:].tolist())
