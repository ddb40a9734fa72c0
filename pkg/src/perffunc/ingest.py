"""Loading, validating and seed-averaging experiment observations.

Input files are UTF-8 delimited text with a header row.  The canonical
columns are::

    language, pivot_language, pivot_size, translated_size, manual_size, seed, f1

``seed`` and ``pivot_language`` are optional; ``model`` and ``task`` columns
are picked up as free-text labels when present.  Files with other column
names can be read by passing a schema mapping ``{canonical: actual}``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import SchemaError, ValidationError

CANONICAL_COLUMNS = (
    "language",
    "pivot_language",
    "pivot_size",
    "translated_size",
    "manual_size",
    "seed",
    "f1",
)
REQUIRED_COLUMNS = ("language", "pivot_size", "translated_size", "manual_size", "f1")
OPTIONAL_COLUMNS = ("pivot_language", "seed", "model", "task")
DEFAULT_PIVOT_LANGUAGE = "en"


@dataclass(frozen=True)
class ExperimentContext:
    """Everything a performance function is conditioned on besides T and M."""

    language: str
    pivot_size: float
    pivot_language: str = DEFAULT_PIVOT_LANGUAGE
    model_label: str = ""
    task_label: str = ""

    def __post_init__(self):
        if not self.pivot_size >= 0:
            raise ValueError(f"pivot_size must be >= 0, got {self.pivot_size!r}")
        if self.language == self.pivot_language:
            raise ValueError(f"target language {self.language!r} equals the pivot language")

    @property
    def key(self) -> tuple[str, float]:
        return (self.language, self.pivot_size)


@dataclass(frozen=True)
class Observation:
    context: ExperimentContext
    t: float
    m: float
    pi: float
    seed: int | None = None

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"translated size must be >= 0, got {self.t!r}")
        if not self.m >= 0:
            raise ValueError(f"manual size must be >= 0, got {self.m!r}")
        if not 0 <= self.pi <= 100:
            raise ValueError(f"performance must lie in [0, 100], got {self.pi!r}")
        if self.t > self.context.pivot_size:
            raise ValueError(
                f"translated size {self.t:g} exceeds pivot size {self.context.pivot_size:g}"
            )


@dataclass(frozen=True)
class ObservationSet:
    """Observations that share one experiment context.

    ``pi_std`` is reporting metadata filled in by :func:`aggregate_seeds`
    (standard deviation across seeds, aligned with ``observations``); it
    does not take part in equality.
    """

    observations: tuple[Observation, ...]
    pi_std: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        if not obs:
            raise ValueError("an ObservationSet needs at least one observation")
        ctx = obs[0].context
        seen = set()
        for o in obs:
            if o.context != ctx:
                raise ValueError("all observations in a set must share one context")
            key = (o.t, o.m, o.seed)
            if key in seen:
                raise ValueError(f"duplicate observation for (t, m, seed) = {key}")
            seen.add(key)
        if self.pi_std is not None and len(self.pi_std) != len(obs):
            raise ValueError("pi_std must align with observations")

    @property
    def context(self) -> ExperimentContext:
        return self.observations[0].context

    def __len__(self):
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    @property
    def t(self) -> np.ndarray:
        return np.array([o.t for o in self.observations], dtype=float)

    @property
    def m(self) -> np.ndarray:
        return np.array([o.m for o in self.observations], dtype=float)

    @property
    def pi(self) -> np.ndarray:
        return np.array([o.pi for o in self.observations], dtype=float)

    def subset(self, indices: Sequence[int]) -> "ObservationSet":
        std = None if self.pi_std is None else tuple(self.pi_std[i] for i in indices)
        return ObservationSet(tuple(self.observations[i] for i in indices), std)

    @classmethod
    def from_arrays(cls, context: ExperimentContext, t, m, pi, seeds=None) -> "ObservationSet":
        t, m, pi = (np.asarray(a, dtype=float).ravel() for a in (t, m, pi))
        if seeds is None:
            seeds = [None] * len(t)
        return cls(
            tuple(
                Observation(context, float(a), float(b), float(c), s)
                for a, b, c, s in zip(t, m, pi, seeds)
            )
        )


@dataclass(frozen=True)
class LoadResult:
    """Outcome of reading a file without raising on bad rows."""

    sets: list[ObservationSet]
    rejects: list[tuple[int, str]]
    n_rows: int

    @property
    def n_accepted(self) -> int:
        return sum(len(s) for s in self.sets)


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if header_line.count("\t") > header_line.count(",") else ","


def _parse_number(raw: str, name: str) -> float:
    try:
        val = float(raw)
    except (TypeError, ValueError):
        raise ValueError(f"{name} is not numeric: {raw!r}") from None
    if not math.isfinite(val):
        raise ValueError(f"{name} is not finite: {raw!r}")
    return val


def read_observations(
    path: str | Path,
    schema: Mapping[str, str] | None = None,
    delimiter: str | None = None,
) -> LoadResult:
    """Parse a delimited file, collecting invalid rows instead of raising on them.

    Missing required columns still raise :class:`SchemaError` since no row
    could be interpreted.
    """
    schema = dict(schema or {})
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise SchemaError(f"{path}: empty file, a header row is required")
    delimiter = delimiter or _sniff_delimiter(text.splitlines()[0])
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip() for h in (reader.fieldnames or [])]
    reader.fieldnames = header

    col = {c: schema.get(c, c) for c in CANONICAL_COLUMNS + ("model", "task")}
    missing = [c for c in REQUIRED_COLUMNS if col[c] not in header]
    if missing:
        names = ", ".join(f"{c!r}" + (f" (mapped to {col[c]!r})" if col[c] != c else "") for c in missing)
        raise SchemaError(f"{path}: missing required column(s) {names}")
    has = {c: col[c] in header for c in OPTIONAL_COLUMNS}

    parsed = []
    rejects = []
    n_rows = 0
    for row_no, row in enumerate(reader, start=1):
        n_rows += 1
        try:
            language = (row[col["language"]] or "").strip()
            if not language:
                raise ValueError("language is empty")
            pivot_size = _parse_number(row[col["pivot_size"]], "pivot_size")
            t = _parse_number(row[col["translated_size"]], "translated_size")
            m = _parse_number(row[col["manual_size"]], "manual_size")
            pi = _parse_number(row[col["f1"]], "f1")
            seed = None
            if has["seed"]:
                raw = (row[col["seed"]] or "").strip()
                if raw:
                    seed_f = _parse_number(raw, "seed")
                    if seed_f != int(seed_f):
                        raise ValueError(f"seed is not an integer: {raw!r}")
                    seed = int(seed_f)
            pivot_language = DEFAULT_PIVOT_LANGUAGE
            if has["pivot_language"]:
                pivot_language = (row[col["pivot_language"]] or "").strip() or DEFAULT_PIVOT_LANGUAGE
            model = (row[col["model"]] or "").strip() if has["model"] else ""
            task = (row[col["task"]] or "").strip() if has["task"] else ""
            if t < 0 or m < 0:
                raise ValueError("data sizes must be non-negative")
            if pi < 0:
                raise ValueError(f"f1 {pi:g} is negative")
            if t > pivot_size:
                raise ValueError(f"translated_size {t:g} exceeds pivot_size {pivot_size:g}")
            if language == pivot_language:
                raise ValueError(f"language {language!r} equals the pivot language")
        except (ValueError, KeyError) as exc:
            rejects.append((row_no, str(exc)))
            continue
        parsed.append((row_no, language, pivot_language, pivot_size, model, task, t, m, pi, seed))

    # [0, 1] performance is rescaled to the 0-100 scale used everywhere else
    if parsed and all(p[8] <= 1.0 for p in parsed):
        warnings.warn(
            f"{path}: every performance value is <= 1; treating them as fractions and scaling by 100",
            stacklevel=2,
        )
        parsed = [p[:8] + (p[8] * 100.0,) + p[9:] for p in parsed]

    groups: OrderedDict[tuple[str, float], list[Observation]] = OrderedDict()
    contexts: dict[tuple[str, float], ExperimentContext] = {}
    for row_no, language, pivot_language, pivot_size, model, task, t, m, pi, seed in parsed:
        if pi > 100:
            rejects.append((row_no, f"f1 {pi:g} is outside [0, 100]"))
            continue
        key = (language, pivot_size)
        ctx = contexts.setdefault(
            key, ExperimentContext(language, pivot_size, pivot_language, model, task)
        )
        if (pivot_language, model, task) != (ctx.pivot_language, ctx.model_label, ctx.task_label):
            rejects.append((row_no, f"context labels differ from earlier rows for {key}"))
            continue
        obs = Observation(ctx, t, m, pi, seed)
        groups.setdefault(key, [])
        if any(o.t == t and o.m == m and o.seed == seed for o in groups[key]):
            rejects.append((row_no, f"duplicate (t, m, seed) = ({t:g}, {m:g}, {seed})"))
            continue
        groups[key].append(obs)

    rejects.sort()
    sets = [ObservationSet(tuple(v)) for v in groups.values()]
    return LoadResult(sets=sets, rejects=rejects, n_rows=n_rows)


def load_observations(
    path: str | Path,
    schema: Mapping[str, str] | None = None,
    delimiter: str | None = None,
) -> list[ObservationSet]:
    """Read a file into one :class:`ObservationSet` per (language, pivot size).

    Raises :class:`ValidationError` listing every bad row if any row fails.
    """
    result = read_observations(path, schema, delimiter)
    if result.rejects:
        raise ValidationError(result.rejects)
    return result.sets


def write_observations(path: str | Path, sets: ObservationSet | Sequence[ObservationSet]) -> None:
    """Write sets in the canonical column layout (readable by :func:`load_observations`)."""
    if isinstance(sets, ObservationSet):
        sets = [sets]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CANONICAL_COLUMNS + ("model", "task"))
        for s in sets:
            ctx = s.context
            for o in s:
                w.writerow(
                    [
                        ctx.language,
                        ctx.pivot_language,
                        repr(ctx.pivot_size),
                        repr(o.t),
                        repr(o.m),
                        "" if o.seed is None else o.seed,
                        repr(o.pi),
                        ctx.model_label,
                        ctx.task_label,
                    ]
                )


def aggregate_seeds(obs: ObservationSet) -> ObservationSet:
    """Average repeated runs of the same ``(t, m)`` configuration.

    The result has one seedless observation per distinct ``(t, m)`` in
    first-seen order; the spread across seeds is kept in ``pi_std``.
    """
    if all(o.seed is None for o in obs):
        # already one record per (t, m)
        return obs
    buckets: OrderedDict[tuple[float, float], list[float]] = OrderedDict()
    for o in obs:
        buckets.setdefault((o.t, o.m), []).append(o.pi)
    ctx = obs.context
    out = []
    std = []
    for (t, m), vals in buckets.items():
        out.append(Observation(ctx, t, m, float(np.mean(vals))))
        std.append(float(np.std(vals)))
    return ObservationSet(tuple(out), tuple(std))
