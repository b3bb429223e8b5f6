"""Sparsification curves and the area under the sparsification error (AUSE).

Instances are removed most-uncertain first; a merit (class IoU, accuracy or
Brier score) is tracked on what remains. The oracle removes misclassified
instances first. AUSE is the trapezoidal area between the oracle curve and
the curve produced by an uncertainty sorter.

``class_id`` only affects IoU merit: the sort stays global, the oracle targets
false positives and false negatives of that class, and IoU is measured for
that class. Accuracy and Brier merit are always evaluated on the whole
remaining set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .core import CalibrationDataError, LabelOutOfRange, PredictionSet, SparsificationConfig
from .scores import brier_instance, score_all

SORTERS = ("variation_ratio", "entropy", "cross_entropy", "oracle")
MERITS = ("iou", "accuracy", "brier")
# merits where smaller is better
LOSS_MERITS = ("brier",)

_SORTER_SCORE = {"variation_ratio": "variation_ratio", "entropy": "entropy", "cross_entropy": "cross_entropy"}


class UnknownSorter(ValueError):
    pass


class UnknownClass(LabelOutOfRange):
    pass


class EmptySubset(CalibrationDataError):
    pass


@dataclass(frozen=True, eq=False)
class CurveSeries:
    fractions: np.ndarray
    values: np.ndarray
    merit_kind: str
    vacuous: Optional[np.ndarray] = None  # IoU only: grid points where TP+FP+FN = 0


@dataclass(frozen=True, eq=False)
class AuseResult:
    ause: float
    oracle: CurveSeries
    method: CurveSeries
    sorter_kind: str
    negative_area_flag: bool
    class_id: Optional[int] = None

    @property
    def error_curve(self) -> np.ndarray:
        return _error_curve(self.oracle, self.method)


def _check_class(s: PredictionSet, class_id: Optional[int]) -> None:
    if class_id is not None and not 0 <= int(class_id) < s.k:
        raise UnknownClass(f"class {class_id} outside [0, {s.k})")


def error_indicator(s: PredictionSet, class_id: Optional[int] = None) -> np.ndarray:
    """Misclassification mask, or the FP/FN mask of ``class_id``."""
    _check_class(s, class_id)
    pred = s.predictions
    if class_id is None:
        return pred != s.labels
    return (pred == class_id) ^ (s.labels == class_id)


def sort_scores(s: PredictionSet, sorter_kind: str) -> np.ndarray:
    if sorter_kind not in _SORTER_SCORE:
        raise UnknownSorter(f"unknown sorter {sorter_kind!r}; expected one of {SORTERS}")
    return score_all(s, _SORTER_SCORE[sorter_kind]).values


def order_by_scores(scores: np.ndarray) -> np.ndarray:
    """Descending by score, ties by ascending index."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


def oracle_order(s: PredictionSet, class_id: Optional[int] = None) -> np.ndarray:
    err = error_indicator(s, class_id)
    return np.concatenate([np.flatnonzero(err), np.flatnonzero(~err)])


def sort_order(s: PredictionSet, sorter_kind: str, class_id: Optional[int] = None) -> np.ndarray:
    if sorter_kind == "oracle":
        return oracle_order(s, class_id)
    return order_by_scores(sort_scores(s, sorter_kind))


def merit(subset: PredictionSet, merit_kind: str, class_id: Optional[int] = None) -> float:
    """Merit of a (non-empty) set of predictions.

    IoU of a class that is neither predicted nor present counts as 1.0.
    """
    if subset.n == 0:
        raise EmptySubset("merit of an empty subset is undefined")
    if merit_kind == "accuracy":
        return float(np.mean(subset.correct))
    if merit_kind == "brier":
        return float(np.mean(brier_instance(subset.probs, subset.labels)))
    if merit_kind == "iou":
        if class_id is None:
            raise ValueError("IoU merit needs a class_id")
        _check_class(subset, class_id)
        pred, lab = subset.predictions == class_id, subset.labels == class_id
        tp = int(np.sum(pred & lab))
        denom = tp + int(np.sum(pred & ~lab)) + int(np.sum(~pred & lab))
        return 1.0 if denom == 0 else tp / denom
    raise ValueError(f"unknown merit {merit_kind!r}; expected one of {MERITS}")


def removal_counts(n: int, fractions: np.ndarray) -> np.ndarray:
    """Instances removed at each fraction: ``floor(f * n)`` (1e-9 slack for grid rounding)."""
    return np.floor(np.asarray(fractions) * n + 1e-9).astype(np.int64)


def _suffix(x: np.ndarray) -> np.ndarray:
    # suffix[k] = sum(x[k:]), length n + 1
    out = np.zeros(x.shape[0] + 1, dtype=x.dtype)
    out[:-1] = np.cumsum(x[::-1])[::-1]
    return out


def sparsification_curve(
    s: PredictionSet,
    order: np.ndarray,
    merit_kind: str,
    cfg: SparsificationConfig = SparsificationConfig(),
    class_id: Optional[int] = None,
) -> CurveSeries:
    order = np.asarray(order)
    n = s.n
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise ValueError("order must be a permutation of range(N)")
    fr = cfg.fractions
    k = removal_counts(n, fr)
    if np.any(k >= n):
        raise EmptySubset("sparsification grid removes every instance")
    remaining = n - k
    vacuous = None
    if merit_kind == "accuracy":
        values = _suffix(s.correct[order].astype(np.int64))[k] / remaining
    elif merit_kind == "brier":
        values = _suffix(brier_instance(s.probs, s.labels)[order])[k] / remaining
    elif merit_kind == "iou":
        if class_id is None:
            raise ValueError("IoU merit needs a class_id")
        _check_class(s, class_id)
        pred = (s.predictions == class_id)[order]
        lab = (s.labels == class_id)[order]
        tp = _suffix((pred & lab).astype(np.int64))[k]
        fp = _suffix((pred & ~lab).astype(np.int64))[k]
        fn = _suffix((~pred & lab).astype(np.int64))[k]
        denom = tp + fp + fn
        vacuous = denom == 0
        values = np.where(vacuous, 1.0, tp / np.maximum(denom, 1))
    else:
        raise ValueError(f"unknown merit {merit_kind!r}; expected one of {MERITS}")
    return CurveSeries(fr, values.astype(np.float64), merit_kind, vacuous)


def trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    y, x = np.asarray(y, dtype=np.float64), np.asarray(x, dtype=np.float64)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def _error_curve(oracle: CurveSeries, method: CurveSeries) -> np.ndarray:
    if oracle.merit_kind in LOSS_MERITS:
        return method.values - oracle.values
    return oracle.values - method.values


def _result(oracle: CurveSeries, method: CurveSeries, sorter_kind: str, class_id) -> AuseResult:
    err = _error_curve(oracle, method)
    return AuseResult(
        ause=trapezoid(err, oracle.fractions),
        oracle=oracle,
        method=method,
        sorter_kind=sorter_kind,
        negative_area_flag=bool(np.any(err < -1e-12)),
        class_id=class_id,
    )


def _merit_class(merit_kind: str, class_id: Optional[int]) -> Optional[int]:
    if merit_kind == "iou":
        if class_id is None:
            raise ValueError("IoU merit needs a class_id")
        return int(class_id)
    return None


def ause(
    s: PredictionSet,
    sorter_kind: str,
    merit_kind: str,
    cfg: SparsificationConfig = SparsificationConfig(),
    class_id: Optional[int] = None,
) -> AuseResult:
    """Signed AUSE; ``negative_area_flag`` marks a method curve above the oracle."""
    if sorter_kind not in SORTERS:
        raise UnknownSorter(f"unknown sorter {sorter_kind!r}; expected one of {SORTERS}")
    c = _merit_class(merit_kind, class_id)
    _check_class(s, c)
    oracle = sparsification_curve(s, oracle_order(s, c), merit_kind, cfg, c)
    method = sparsification_curve(s, sort_order(s, sorter_kind, c), merit_kind, cfg, c)
    return _result(oracle, method, sorter_kind, c)


def ause_ce(
    s: PredictionSet,
    merit_kind: str,
    cfg: SparsificationConfig = SparsificationConfig(),
    class_id: Optional[int] = None,
) -> AuseResult:
    """AUSE with instances sorted by their ground-truth cross-entropy."""
    return ause(s, "cross_entropy", merit_kind, cfg, class_id)


def ause_classwise(
    s: PredictionSet,
    sorter_kind: str,
    merit_kind: str,
    cfg: SparsificationConfig = SparsificationConfig(),
    classes: Optional[Iterable[int]] = None,
) -> dict[int, AuseResult]:
    """AUSE for several classes sharing one global sort.

    For accuracy and Brier merit the class plays no role, so a single entry
    keyed by ``-1`` is returned.
    """
    if sorter_kind not in SORTERS:
        raise UnknownSorter(f"unknown sorter {sorter_kind!r}; expected one of {SORTERS}")
    if merit_kind != "iou":
        return {-1: ause(s, sorter_kind, merit_kind, cfg)}
    classes = [int(c) for c in np.unique(s.labels)] if classes is None else [int(c) for c in classes]
    shared = None if sorter_kind == "oracle" else sort_order(s, sorter_kind)
    out = {}
    for c in classes:
        _check_class(s, c)
        oracle = sparsification_curve(s, oracle_order(s, c), merit_kind, cfg, c)
        order = oracle_order(s, c) if shared is None else shared
        method = sparsification_curve(s, order, merit_kind, cfg, c)
        out[c] = _result(oracle, method, sorter_kind, c)
    return out
