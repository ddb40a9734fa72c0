"""Command-line entry point: ``perffunc {fit,evaluate,expansion-path,isoperf,cost-curve}``.

Every command reads observations (or a saved fit report), does its work per
(language, pivot size) context and writes JSON, CSV and SVG files to
``--out-dir``.  Outputs are assembled in memory and written only once all of
them succeeded, so a failing run leaves no partial files behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import (
    GridSpec,
    classify_mt_trend,
    gpr_isoperf_contour,
    gpr_least_cost_point,
    isoperf_bundle,
)
from .core import AmueParams, CostModel, ExpansionPath, RealizableRegion, min_cost_curve, trace_expansion_path
from .errors import InfeasibleError, PerfFuncError
from .fitting.amue import FitOptions, fit_amue
from .fitting.gpr import GprModel, fit_gpr
from .fitting.metrics import evaluate_fit, split_train_test
from .ingest import ObservationSet, load_observations
from .render import TmDiagramSpec, isocosts_for_path, render_cost_curve, render_tm_diagram

MODELS = ("amue", "gpr", "both")
DEFAULTS = {
    "input": None,
    "schema": None,
    "ct": None,
    "cm": None,
    "cost_ratio": None,
    "pmax": None,
    "model": "amue",
    "seed": 0,
    "out_dir": ".",
    "levels": None,
    "params": None,
    "restarts": 10,
    "max_iterations": 500,
    "train_fraction": 0.8,
    "grid": 200,
}
N_DEFAULT_LEVELS = 12


class UsageError(PerfFuncError):
    """Inconsistent or missing command-line options."""


@dataclass
class RunConfig:
    """Resolved options for one command (config file values overridden by flags)."""

    command: str
    input: str | None = None
    schema: dict = field(default_factory=dict)
    ct: float | None = None
    cm: float | None = None
    cost_ratio: float | None = None
    pmax: float | None = None
    model: str = "amue"
    seed: int = 0
    out_dir: str = "."
    levels: list[float] | None = None
    params: str | None = None
    restarts: int = 10
    max_iterations: int = 500
    train_fraction: float = 0.8
    grid: int = 200

    def cost_model(self) -> CostModel:
        if self.ct is None:
            raise UsageError("--ct is required")
        if (self.cm is None) == (self.cost_ratio is None):
            raise UsageError("give exactly one of --cm or --cost-ratio together with --ct")
        if self.cm is not None:
            return CostModel(self.ct, self.cm)
        return CostModel.from_ratio(self.ct, self.cost_ratio)

    def fit_options(self) -> FitOptions:
        return FitOptions(max_iterations=self.max_iterations, restarts=self.restarts, rng_seed=self.seed)

    def region(self, pivot_size: float) -> RealizableRegion:
        return RealizableRegion(self.pmax if self.pmax is not None else float(pivot_size))

    @property
    def use_amue(self) -> bool:
        return self.model in ("amue", "both")

    @property
    def use_gpr(self) -> bool:
        return self.model in ("gpr", "both")


# ---------------------------------------------------------------- parsing


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perffunc",
        description="Fit performance functions of translated (T) and manual (M) data and plan least-cost data mixes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    a = shared.add_argument
    a("--config", help="JSON file with option values; command-line flags take precedence")
    a("--input", help="CSV/TSV file of observations")
    a("--schema", help="JSON object (inline or a file path) mapping canonical column names to file columns")
    a("--ct", type=float, help="cost of one translated example")
    costs = shared.add_mutually_exclusive_group()
    costs.add_argument("--cm", type=float, help="cost of one manual example")
    costs.add_argument("--cost-ratio", dest="cost_ratio", type=float, help="c_t / c_m")
    a("--pmax", type=float, help="override the realizable limit on T (default: the pivot size)")
    a("--model", choices=MODELS, help="which performance function to use (default: amue)")
    a("--seed", type=int, help="seed for restarts and splits (default: 0)")
    a("--out-dir", dest="out_dir", help="directory for outputs (default: current directory)")
    a("--levels", type=_float_list, help="comma-separated performance levels")
    a("--params", help="fit report JSON to take AMUE parameters from instead of fitting")
    a("--restarts", type=int, help="optimizer starts per fit (default: 10)")
    a("--max-iterations", dest="max_iterations", type=int, help="iteration cap per start (default: 500)")
    a("--train-fraction", dest="train_fraction", type=float, help="evaluate: training share (default: 0.8)")
    a("--grid", type=int, help="GPR contour grid nodes per axis (default: 200)")
    helps = {
        "fit": "fit parameters per (language, pivot size) and write a JSON report",
        "evaluate": "train/test split goodness of fit per fine-tuning setup",
        "expansion-path": "least-cost points per level, as CSV plus a T-M diagram",
        "isoperf": "isoperf curves as CSV plus a T-M diagram",
        "cost-curve": "minimum cost against performance per language",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[shared], help=text, description=text)
    return parser


def _load_json_arg(value, what: str):
    if value is None or isinstance(value, dict):
        return value or {}
    text = str(value)
    p = Path(text)
    if not text.lstrip().startswith("{") and p.exists():
        text = p.read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError(f"{what} must be a JSON object")
    return obj


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the ``--config`` file and explicit flags (flags win)."""
    file_cfg = {}
    if args.config:
        file_cfg = _load_json_arg(Path(args.config).read_text(encoding="utf-8"), "--config")
        unknown = sorted(set(file_cfg) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown key(s) in config file: {', '.join(unknown)}")
    values = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        values[key] = flag if flag is not None else file_cfg.get(key, default)
    if values["levels"] is not None and not isinstance(values["levels"], list):
        values["levels"] = _float_list(str(values["levels"]))
    values["schema"] = _load_json_arg(values["schema"], "--schema")
    if values["model"] not in MODELS:
        raise UsageError(f"--model must be one of {', '.join(MODELS)}")
    if "cm" in file_cfg and "cost_ratio" in file_cfg:
        raise UsageError("config file gives both cm and cost_ratio")
    # a flag for one cost form replaces the other form from the config file
    if args.cm is not None:
        values["cost_ratio"] = None
    if args.cost_ratio is not None:
        values["cm"] = None
    return RunConfig(command=args.command, **values)


# ---------------------------------------------------------------- helpers


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _round_half_up(v: float) -> int:
    return int(Decimal(repr(v)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _tag(language: str, pivot_size: float) -> str:
    p = int(pivot_size) if float(pivot_size).is_integer() else pivot_size
    return f"{language}_P{p}"


def _context_order(key):
    language, pivot_size = key
    return (-pivot_size, language)


def _load_sets(cfg: RunConfig) -> list[ObservationSet]:
    if not cfg.input:
        raise UsageError("--input is required")
    sets = load_observations(cfg.input, cfg.schema)
    if not sets:
        raise UsageError(f"{cfg.input}: no observations")
    return sorted(sets, key=lambda s: _context_order(s.context.key))


def default_levels(a_zs: float, pi: np.ndarray, n: int = N_DEFAULT_LEVELS) -> list[float]:
    """``n`` evenly spaced levels from ``a_zs + 1`` to the 95th percentile of ``pi``."""
    top = float(np.percentile(pi, 95))
    if not top > a_zs + 1:
        raise UsageError(
            f"cannot choose default levels: 95th percentile {top:g} is not above zero-shot + 1 ({a_zs + 1:g}); "
            "pass --levels"
        )
    return [float(x) for x in np.linspace(a_zs + 1, top, n)]


@dataclass
class _Context:
    language: str
    pivot_size: float
    obs: ObservationSet | None
    params: AmueParams | None
    gpr: GprModel | None = None


def _contexts(cfg: RunConfig, need_gpr: bool = False) -> list[_Context]:
    """AMUE parameters (and GPR models when asked) per context.

    Parameters come from ``--params`` when given, otherwise from fitting
    ``--input``.  GPR models always need the observations.
    """
    sets = {s.context.key: s for s in _load_sets(cfg)} if cfg.input else {}
    out = []
    if cfg.params:
        report = json.loads(Path(cfg.params).read_text(encoding="utf-8"))
        rows = report.get("contexts", [])
        for row in rows:
            if "amue" not in row:
                continue
            key = (row["language"], float(row["pivot_size"]))
            out.append(_Context(key[0], key[1], sets.get(key), AmueParams.from_dict(row["amue"]["params"])))
        if not out:
            raise UsageError(f"{cfg.params}: no AMUE parameters in report")
    else:
        if not sets:
            raise UsageError("--input or --params is required")
        for key, s in sets.items():
            params = fit_amue(s, cfg.fit_options())[0] if cfg.use_amue or not need_gpr else None
            out.append(_Context(key[0], key[1], s, params))
    if need_gpr:
        for c in out:
            if c.obs is None:
                raise UsageError(f"GPR needs observations for {c.language} P={c.pivot_size:g}; pass --input")
            c.gpr = fit_gpr(c.obs, cfg.fit_options())
    return sorted(out, key=lambda c: _context_order((c.language, c.pivot_size)))


def _levels_for(cfg: RunConfig, ctx: _Context) -> list[float]:
    if cfg.levels:
        return sorted(cfg.levels)
    if ctx.obs is None:
        raise UsageError("--levels is required when no observations are given")
    a_zs = ctx.params.a_zs if ctx.params is not None else float(ctx.obs.pi.min())
    return default_levels(a_zs, ctx.obs.pi)


def _usable_levels(params: AmueParams, levels: list[float], label: str) -> list[float]:
    usable = [p for p in levels if p > params.a_zs]
    if len(usable) < len(levels):
        warnings.warn(f"{label}: skipping level(s) at or below zero-shot {params.a_zs:.4g}", stacklevel=2)
    if not usable:
        raise InfeasibleError(f"{label}: every level is at or below zero-shot {params.a_zs:.4g}")
    return usable


def _ranges(region: RealizableRegion, ts, ms, obs: ObservationSet | None):
    ts = [v for v in ts if math.isfinite(v)]
    ms = [v for v in ms if math.isfinite(v)]
    if obs is not None:
        ts += list(obs.t)
        ms += list(obs.m)
    t_hi = max(ts + [1.0])
    if math.isfinite(region.p_max):
        t_hi = max(t_hi, region.p_max) * 1.25
    else:
        t_hi *= 1.1
    m_hi = max(ms + [1.0]) * 1.15
    return (0.0, float(t_hi)), (0.0, float(m_hi))


# ---------------------------------------------------------------- commands


def cmd_fit(cfg: RunConfig) -> dict[str, str]:
    sets = _load_sets(cfg)
    rows = []
    for s in sets:
        ctx = s.context
        row = {"language": ctx.language, "pivot_size": ctx.pivot_size, "n": len(s)}
        if cfg.use_amue:
            params, report = fit_amue(s, cfg.fit_options())
            row["amue"] = {
                "params": params.as_dict(),
                "report": report.as_dict(),
                "mt_trend": classify_mt_trend(params).label,
            }
        if cfg.use_gpr:
            model = fit_gpr(s, cfg.fit_options())
            row["gpr"] = {"hyperparameters": model.as_dict(), "report": evaluate_fit(model, s).as_dict()}
        rows.append(row)
    report = {"command": "fit", "model": cfg.model, "seed": cfg.seed, "restarts": cfg.restarts, "contexts": rows}
    return {"fit_report.json": _json(report)}


def _pooled(pairs: list[tuple[np.ndarray, np.ndarray]]) -> dict:
    if not pairs:
        return {"n": 0, "rmse": None, "r2": None}
    y = np.concatenate([p[0] for p in pairs])
    yhat = np.concatenate([p[1] for p in pairs])
    rmse = float(np.sqrt(np.mean((y - yhat) ** 2)))
    ss = float(np.sum((y - y.mean()) ** 2))
    return {"n": int(y.size), "rmse": rmse, "r2": (1.0 - float(np.sum((y - yhat) ** 2)) / ss) if ss > 0 else None}


def cmd_evaluate(cfg: RunConfig) -> dict[str, str]:
    from .fitting.metrics import as_predictor

    sets = _load_sets(cfg)
    rows = []
    pooled: dict[str, list] = {"amue": [], "gpr": []}
    for s in sets:
        ctx = s.context
        train, test = split_train_test(s, cfg.train_fraction, cfg.seed)
        row = {"language": ctx.language, "pivot_size": ctx.pivot_size, "n_train": len(train), "n_test": len(test)}
        fitted = []
        if cfg.use_amue:
            fitted.append(("amue", fit_amue(train, cfg.fit_options())[0]))
        if cfg.use_gpr:
            fitted.append(("gpr", fit_gpr(train, cfg.fit_options())))
        for name, model in fitted:
            row[name] = {
                "train": evaluate_fit(model, train, "train").as_dict(),
                "test": evaluate_fit(model, test, "test").as_dict(),
            }
            pooled[name].append((test.pi, np.asarray(as_predictor(model)(test.t, test.m), dtype=float)))
        rows.append(row)
    report = {
        "command": "evaluate",
        "model": cfg.model,
        "seed": cfg.seed,
        "train_fraction": cfg.train_fraction,
        "contexts": rows,
        "pooled_test": {k: _pooled(v) for k, v in pooled.items() if v},
    }
    return {"evaluate_report.json": _json(report)}


def cmd_expansion_path(cfg: RunConfig) -> dict[str, str]:
    cm = cfg.cost_model()
    ctxs = _contexts(cfg, need_gpr=cfg.use_gpr)
    files = {}
    for c in ctxs:
        tag = _tag(c.language, c.pivot_size)
        region = cfg.region(c.pivot_size)
        levels = _levels_for(cfg, c)
        rows = []
        path = None
        if c.params is not None:
            lv = _usable_levels(c.params, levels, tag)
            if not c.params.t_active:
                warnings.warn(f"{tag}: translated-data coefficient is degenerate; the path lies along T = 0", stacklevel=2)
            path = trace_expansion_path(c.params, cm, region, lv)
            for p in path:
                rows.append(("amue", p.pi, p.t, p.m, _round_half_up(p.t), _round_half_up(p.m), p.cost, p.on_boundary))
        gpr_pts = []
        if c.gpr is not None:
            grid = GridSpec.for_model(c.gpr, region.p_max, cfg.grid)
            for lvl in levels:
                try:
                    p = gpr_least_cost_point(c.gpr, cm, region, lvl, grid)
                except InfeasibleError as exc:
                    warnings.warn(f"{tag}: {exc}", stacklevel=2)
                    continue
                gpr_pts.append(p)
                rows.append(("gpr", lvl, p.t, p.m, _round_half_up(p.t), _round_half_up(p.m), p.cost, p.on_boundary))
        if not rows:
            raise InfeasibleError(f"{tag}: no level could be reached")
        files[f"expansion_path_{tag}.csv"] = _csv(
            ("model", "pi", "t", "m", "t_rounded", "m_rounded", "cost", "on_boundary"), rows
        )
        shown = path
        if shown is None:
            try:
                shown = ExpansionPath(tuple(gpr_pts))
            except ValueError:
                raise InfeasibleError(f"{tag}: GPR least-cost points are not ordered by cost") from None
        t_rng, m_rng = _ranges(region, list(shown.t), list(shown.m), c.obs)
        contours = isoperf_bundle(c.params, list(shown.pi), t_rng[1], 300) if c.params is not None else []
        extra = []
        if c.gpr is not None and c.params is None:
            grid = GridSpec.for_model(c.gpr, region.p_max, cfg.grid)
            for lvl in shown.pi:
                extra += gpr_isoperf_contour(c.gpr, float(lvl), grid)
        spec = TmDiagramSpec(
            contours=contours,
            extra_contours=extra,
            isocosts=isocosts_for_path(shown, cm),
            path=shown,
            region=region,
            t_range=t_rng,
            m_range=m_rng,
            title=f"Expansion path: {c.language}, P = {c.pivot_size:g}, c_t/c_m = {cm.cost_ratio:g}",
        )
        files[f"expansion_path_{tag}.svg"] = render_tm_diagram(spec)
    return files


def cmd_isoperf(cfg: RunConfig) -> dict[str, str]:
    ctxs = _contexts(cfg, need_gpr=cfg.use_gpr)
    files = {}
    for c in ctxs:
        tag = _tag(c.language, c.pivot_size)
        region = cfg.region(c.pivot_size)
        levels = _levels_for(cfg, c)
        t_hi = region.p_max if math.isfinite(region.p_max) else None
        if t_hi is None:
            t_hi = float(c.obs.t.max()) if c.obs is not None and c.obs.t.max() > 0 else 1e4
        amue_c = isoperf_bundle(c.params, _usable_levels(c.params, levels, tag), t_hi * 1.25, 300) if cfg.use_amue and c.params is not None else []
        gpr_c = []
        if c.gpr is not None:
            grid = GridSpec.for_model(c.gpr, region.p_max, cfg.grid)
            for lvl in levels:
                gpr_c += gpr_isoperf_contour(c.gpr, lvl, grid)
        if not amue_c and not gpr_c:
            raise InfeasibleError(f"{tag}: none of the levels has an isoperf")
        rows = []
        for contours in (amue_c, gpr_c):
            piece = {}
            for cont in contours:
                k = piece.get(cont.level, 0)
                piece[cont.level] = k + 1
                rows += [(cont.source, cont.level, k, t, m) for t, m in cont.vertices]
        files[f"isoperf_{tag}.csv"] = _csv(("model", "level", "piece", "t", "m"), rows)
        all_m = [v for cont in amue_c + gpr_c for v in cont.m]
        m_cap = float(np.percentile(all_m, 98)) if all_m else 1.0
        t_rng, m_rng = _ranges(region, [t_hi], [m_cap], c.obs)
        spec = TmDiagramSpec(
            contours=amue_c,
            extra_contours=gpr_c,
            region=region,
            t_range=t_rng,
            m_range=m_rng,
            title=f"Isoperfs: {c.language}, P = {c.pivot_size:g}",
        )
        files[f"isoperf_{tag}.svg"] = render_tm_diagram(spec)
    return files


def cmd_cost_curve(cfg: RunConfig) -> dict[str, str]:
    if cfg.model == "gpr":
        raise UsageError("cost-curve uses the AMUE closed form; choose --model amue")
    cm = cfg.cost_model()
    ctxs = _contexts(cfg)
    rows = []
    series = []
    pivots = {c.pivot_size for c in ctxs}
    for c in ctxs:
        tag = _tag(c.language, c.pivot_size)
        levels = _usable_levels(c.params, _levels_for(cfg, c), tag)
        curve = min_cost_curve(c.params, cm, cfg.region(c.pivot_size), levels)
        costs = [cost for _, cost in curve]
        if any(b <= a for a, b in zip(costs, costs[1:])):
            raise PerfFuncError(f"{tag}: minimum cost is not strictly increasing in performance")
        rows += [(c.language, c.pivot_size, pi, cost) for pi, cost in curve]
        label = c.language if len(pivots) == 1 else f"{c.language} (P={c.pivot_size:g})"
        series.append((label, curve))
    files = {"cost_curve.csv": _csv(("language", "pivot_size", "pi", "min_cost"), rows)}
    files["cost_curve.svg"] = render_cost_curve(
        series, title=f"Performance vs minimum cost (c_t = {cm.c_t:g}, c_t/c_m = {cm.cost_ratio:g})"
    )
    return files


COMMANDS = {
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "expansion-path": cmd_expansion_path,
    "isoperf": cmd_isoperf,
    "cost-curve": cmd_cost_curve,
}


def _write_all(out_dir: Path, files: dict[str, str]) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name in sorted(files):
            path = out_dir / name
            path.write_text(files[name], encoding="utf-8")
            written.append(path)
    except OSError:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return written


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    old = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        cfg = resolve_config(args)
        files = COMMANDS[cfg.command](cfg)
        for p in _write_all(Path(cfg.out_dir), files):
            print(p)
    except (PerfFuncError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        warnings.showwarning = old
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
