"""Temperature scaling, metric sweeps over a temperature grid and optimum tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    PROB_FLOOR,
    BinningConfig,
    PredictionSet,
    SparsificationConfig,
    TemperatureGrid,
    validate,
)
from .reliability import bin_confidence, bin_uncertainty, calibration_quality_score, ece, uce
from .scores import brier, nll
from .sparsification import ause_classwise

METRICS = ("nll", "brier", "ece", "uce", "ccqs", "ucqs", "ause_v", "ause_s", "ause_ce")
# metrics where larger is better
MAXIMIZED = ("ccqs", "ucqs")
# metrics averaged over classes in mean-over-classes mode
CLASSWISE = ("ece", "uce", "ause_v", "ause_s", "ause_ce")
AUSE_SORTER = {"ause_v": "variation_ratio", "ause_s": "entropy", "ause_ce": "cross_entropy"}


class NonPositiveTemperature(ValueError):
    pass


def logits_from_probs(p) -> np.ndarray:
    """Log-probabilities (floored at 1e-12); softmax maps them back to ``p``."""
    return np.log(np.clip(np.asarray(p, dtype=np.float64), PROB_FLOOR, 1.0))


def recover_logits(s: PredictionSet) -> np.ndarray:
    return s.logits if s.logits is not None else logits_from_probs(s.probs)


def apply_temperature(s: PredictionSet, t: float) -> PredictionSet:
    if not np.isfinite(t) or t <= 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {t}")
    s = validate(s)
    return validate(PredictionSet(labels=s.labels, logits=recover_logits(s) / t, class_names=s.class_names))


@dataclass(frozen=True)
class MetricOptions:
    binning: BinningConfig = BinningConfig()
    sparsification: SparsificationConfig = SparsificationConfig()
    merit: str = "iou"
    holistic: bool = False


def _by_class(s: PredictionSet, classes: Sequence[int], restrict_by: str = "label") -> dict[int, PredictionSet]:
    key = s.labels if restrict_by == "label" else s.predictions
    return {c: s.subset(np.flatnonzero(key == c)) for c in classes}


def evaluate_metrics(
    s: PredictionSet,
    metrics: Sequence[str],
    opts: MetricOptions = MetricOptions(),
    classes: Optional[Sequence[int]] = None,
) -> dict[str, float]:
    """All requested metrics for one (already tempered) set.

    ECE, UCE and the AUSE variants are averaged over ``classes`` (default: the
    classes present in the labels). With ``opts.holistic`` ECE and UCE are
    computed on the pooled set instead; AUSE stays class-wise under IoU merit.
    """
    unknown = set(metrics) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}; expected a subset of {METRICS}")
    if classes is None:
        classes = [int(c) for c in np.unique(s.labels)]
    need_split = not opts.holistic and any(m in ("ece", "uce") for m in metrics)
    parts = _by_class(s, classes) if need_split else {}
    out = {}
    for m in metrics:
        if m == "nll":
            out[m] = nll(s)
        elif m == "brier":
            out[m] = brier(s)
        elif m == "ccqs":
            out[m] = calibration_quality_score(bin_confidence(s, opts.binning))
        elif m == "ucqs":
            out[m] = calibration_quality_score(bin_uncertainty(s, opts.binning))
        elif m in ("ece", "uce"):
            binner, fn = (bin_confidence, ece) if m == "ece" else (bin_uncertainty, uce)
            if opts.holistic:
                out[m] = fn(binner(s, opts.binning))
            else:
                out[m] = float(np.mean([fn(binner(parts[c], opts.binning)) for c in classes]))
        else:
            res = ause_classwise(s, AUSE_SORTER[m], opts.merit, opts.sparsification, classes)
            out[m] = float(np.mean([r.ause for r in res.values()]))
    return out


def best_index(values: np.ndarray, maximize: bool = False) -> int:
    """First index of the optimum, so ties resolve to the smallest temperature."""
    v = np.asarray(values, dtype=np.float64)
    return int(np.argmax(v) if maximize else np.argmin(v))


def minmax(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    span = v.max() - v.min()
    return np.zeros_like(v) if span == 0 else (v - v.min()) / span


@dataclass(frozen=True, eq=False)
class SweepResult:
    grid: TemperatureGrid
    metrics: dict[str, np.ndarray]
    argmin_t: dict[str, float] = field(default_factory=dict)
    normalized: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_values(cls, grid: TemperatureGrid, metrics: dict[str, np.ndarray]) -> "SweepResult":
        metrics = {k: np.asarray(v, dtype=np.float64) for k, v in metrics.items()}
        for k, v in metrics.items():
            if v.shape != (len(grid),):
                raise ValueError(f"metric {k!r} has {v.shape[0]} values for a grid of {len(grid)}")
        argmin = {k: grid.values[best_index(v, k in MAXIMIZED)] for k, v in metrics.items()}
        return cls(grid, metrics, argmin, {k: minmax(v) for k, v in metrics.items()})

    def argmin_index(self, metric: str) -> int:
        return self.grid.values.index(self.argmin_t[metric])


def _run_grid(
    s: PredictionSet,
    grid: TemperatureGrid,
    fn: Callable[[PredictionSet], dict[str, dict[str, float]]],
) -> dict[str, dict[str, list[float]]]:
    out: dict[str, dict[str, list[float]]] = {}
    for t in grid:
        for key, vals in fn(apply_temperature(s, t)).items():
            slot = out.setdefault(key, {})
            for m, v in vals.items():
                slot.setdefault(m, []).append(v)
    return out


def sweep(
    s: PredictionSet,
    grid: TemperatureGrid = TemperatureGrid.arange(),
    metrics: Sequence[str] = METRICS,
    opts: MetricOptions = MetricOptions(),
    classes: Optional[Sequence[int]] = None,
) -> SweepResult:
    """Evaluate ``metrics`` at every temperature of ``grid``."""
    s = validate(s)
    if len(grid) == 0:
        raise ValueError("empty temperature grid")
    vals = _run_grid(s, grid, lambda st: {"all": evaluate_metrics(st, metrics, opts, classes)})
    return SweepResult.from_values(grid, vals["all"])


def summarize_optima(temps: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation of a group of optimal temperatures."""
    t = np.asarray(temps, dtype=np.float64)
    return float(t.mean()), float(t.std())


@dataclass(frozen=True)
class ClassRow:
    class_id: int
    name: str
    count: int
    argmin_t: dict[str, float]


@dataclass(frozen=True, eq=False)
class ClasswiseTable:
    rows: tuple[ClassRow, ...]
    summary: dict[str, dict[str, tuple[float, float]]]
    sweeps: dict[int, SweepResult]


def _class_metrics(s: PredictionSet, metrics, opts: MetricOptions, classes, restrict_by) -> dict[str, dict[str, float]]:
    parts = _by_class(s, classes, restrict_by)
    pooled = [m for m in metrics if not m.startswith("ause_")]
    ause_metrics = [m for m in metrics if m.startswith("ause_")]
    single = MetricOptions(opts.binning, opts.sparsification, opts.merit, holistic=True)
    out = {}
    for c in classes:
        if pooled and parts[c].n == 0:
            raise ValueError(f"class {c} has no instances when restricting by {restrict_by}")
        out[str(c)] = evaluate_metrics(parts[c], pooled, single) if pooled else {}
    for m in ause_metrics:
        if opts.merit == "iou":
            res = ause_classwise(s, AUSE_SORTER[m], "iou", opts.sparsification, classes)
            for c in classes:
                out[str(c)][m] = res[c].ause
        else:
            for c in classes:
                out[str(c)][m] = ause_classwise(parts[c], AUSE_SORTER[m], opts.merit, opts.sparsification)[-1].ause
    return out


def classwise_table(
    s: PredictionSet,
    grid: TemperatureGrid = TemperatureGrid.arange(),
    metrics: Sequence[str] = ("ece", "uce", "ause_v", "ause_s"),
    opts: MetricOptions = MetricOptions(),
    group_size: int = 3,
    restrict_by: str = "label",
) -> ClasswiseTable:
    """Per-class optimal temperatures plus mean/std over class groups.

    Non-AUSE metrics are evaluated on the instances labelled with the class
    (``restrict_by="label"``) or predicted as the class
    (``restrict_by="prediction"``); the latter keeps a calibrated set
    calibrated within each class. AUSE uses the global sort with the class's
    IoU. Groups are the ``group_size`` most and least represented classes and
    all classes.
    """
    if restrict_by not in ("label", "prediction"):
        raise ValueError(f"restrict_by must be 'label' or 'prediction', got {restrict_by!r}")
    s = validate(s)
    classes = [int(c) for c in np.unique(s.labels)]
    counts = {c: int(np.sum(s.labels == c)) for c in classes}
    vals = _run_grid(s, grid, lambda st: _class_metrics(st, metrics, opts, classes, restrict_by))
    sweeps = {c: SweepResult.from_values(grid, vals[str(c)]) for c in classes}
    names = s.class_names
    rows = tuple(
        ClassRow(c, names[c] if names else str(c), counts[c], dict(sweeps[c].argmin_t)) for c in classes
    )
    ranked = sorted(classes, key=lambda c: (-counts[c], c))
    groups = {
        "most_represented": ranked[:group_size],
        "least_represented": ranked[-group_size:][::-1],
        "all": classes,
    }
    summary = {
        g: {m: summarize_optima([sweeps[c].argmin_t[m] for c in members]) for m in metrics}
        for g, members in groups.items()
    }
    return ClasswiseTable(rows, summary, sweeps)


@dataclass(frozen=True)
class PairGap:
    difference: float
    grid_steps: int
    flagged: bool


def decoupling_report(result: SweepResult) -> dict[tuple[str, str], PairGap]:
    """Distance between the optimal temperatures of every metric pair.

    A pair is flagged when the optima are more than one grid step apart.
    """
    names = sorted(result.argmin_t)
    out = {}
    for a, b in itertools.combinations(names, 2):
        steps = abs(result.argmin_index(a) - result.argmin_index(b))
        diff = abs(result.argmin_t[a] - result.argmin_t[b])
        out[(a, b)] = PairGap(round(diff, 10), steps, steps > 1)
    return out
