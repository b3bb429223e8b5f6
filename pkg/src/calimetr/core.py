"""Shared prediction containers, configs and validation errors."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

SIMPLEX_TOL = 1e-6
PROB_FLOOR = 1e-12


class CalibrationDataError(ValueError):
    """Base class for every data-level error raised by the toolkit."""


class ShapeMismatch(CalibrationDataError):
    pass


class SimplexViolation(CalibrationDataError):
    pass


class LabelOutOfRange(CalibrationDataError):
    pass


class EnsembleMisaligned(CalibrationDataError):
    pass


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax in float64 with max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """N instances x K classes of scores plus integer ground-truth labels.

    Construct freely, then call :func:`validate` (or :meth:`validated`) before
    handing the set to any metric; validation materializes ``probs`` and
    freezes the arrays.
    """

    labels: np.ndarray
    logits: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    class_names: Optional[tuple[str, ...]] = None
    provenance: Optional[np.ndarray] = None
    is_validated: bool = field(default=False, repr=False)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def k(self) -> int:
        src = self.probs if self.probs is not None else self.logits
        return int(src.shape[1])

    @property
    def predictions(self) -> np.ndarray:
        """Argmax class per row; ties go to the lowest index."""
        return np.argmax(self.probs, axis=1)

    @property
    def correct(self) -> np.ndarray:
        return self.predictions == self.labels

    @property
    def confidences(self) -> np.ndarray:
        return self.probs.max(axis=1)

    def validated(self) -> "PredictionSet":
        return validate(self)

    def subset(self, idx) -> "PredictionSet":
        """Rows ``idx`` of an already validated set (no re-validation)."""
        return replace(
            self,
            labels=_readonly(self.labels[idx]),
            logits=None if self.logits is None else _readonly(self.logits[idx]),
            probs=_readonly(self.probs[idx]),
            provenance=None if self.provenance is None else _readonly(self.provenance[idx]),
        )


def validate(s: PredictionSet) -> PredictionSet:
    """Check shapes, simplex rows and label range; materialize probs.

    Probability rows within ``SIMPLEX_TOL`` of summing to one are divided by
    their row sum. Already-validated sets are returned unchanged, which keeps
    the operation idempotent bit for bit.
    """
    if s.is_validated:
        return s
    if s.logits is None and s.probs is None:
        raise ShapeMismatch("prediction set needs logits or probs")

    labels = np.asarray(s.labels)
    if labels.ndim != 1:
        raise ShapeMismatch(f"labels must be 1-D, got shape {labels.shape}")
    n = labels.shape[0]
    if n < 1:
        raise ShapeMismatch("prediction set is empty")
    if labels.dtype.kind == "f":
        if not np.all(np.isfinite(labels)) or np.any(labels != np.round(labels)):
            raise LabelOutOfRange("labels must be integers")
    elif labels.dtype.kind not in "iu":
        raise LabelOutOfRange(f"labels must be integers, got dtype {labels.dtype}")
    labels = labels.astype(np.int64)

    logits = None
    if s.logits is not None:
        logits = np.array(s.logits, dtype=np.float64)
        if logits.ndim != 2 or logits.shape[0] != n:
            raise ShapeMismatch(f"logits shape {logits.shape} does not match N={n}")
        if not np.all(np.isfinite(logits)):
            raise ShapeMismatch("logits contain non-finite values")

    if s.probs is not None:
        probs = np.array(s.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != n:
            raise ShapeMismatch(f"probs shape {probs.shape} does not match N={n}")
        if logits is not None and logits.shape != probs.shape:
            raise ShapeMismatch(f"logits {logits.shape} and probs {probs.shape} disagree")
        if not np.all(np.isfinite(probs)):
            raise SimplexViolation("probs contain non-finite values")
        if probs.min() < 0.0 or probs.max() > 1.0 + SIMPLEX_TOL:
            raise SimplexViolation("probabilities must lie in [0, 1]")
        sums = probs.sum(axis=1)
        bad = np.abs(sums - 1.0) > SIMPLEX_TOL
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise SimplexViolation(f"row {i} sums to {sums[i]:.9g}")
        probs = np.clip(probs / sums[:, None], 0.0, 1.0)
        if logits is not None:
            ref = softmax(logits)
            if np.max(np.abs(ref - probs)) > SIMPLEX_TOL:
                raise SimplexViolation("probs do not match row-softmax of logits")
    else:
        probs = softmax(logits)

    k = probs.shape[1]
    if k < 2:
        raise ShapeMismatch(f"need at least 2 classes, got K={k}")
    if labels.min() < 0 or labels.max() >= k:
        raise LabelOutOfRange(f"labels must lie in [0, {k})")

    names = s.class_names
    if names is not None:
        names = tuple(str(x) for x in names)
        if len(names) != k:
            raise ShapeMismatch(f"{len(names)} class names for K={k}")

    prov = s.provenance
    if prov is not None:
        prov = np.array(prov)
        if prov.shape[0] != n:
            raise ShapeMismatch("provenance length does not match N")
        prov = _readonly(prov)

    return PredictionSet(
        labels=_readonly(labels),
        logits=None if logits is None else _readonly(logits),
        probs=_readonly(probs),
        class_names=names,
        provenance=prov,
        is_validated=True,
    )


def make_set(labels, *, logits=None, probs=None, class_names=None) -> PredictionSet:
    """Build and validate a set in one call."""
    return validate(
        PredictionSet(labels=np.asarray(labels), logits=logits, probs=probs, class_names=class_names)
    )


@dataclass(frozen=True, eq=False)
class EnsemblePredictions:
    members: tuple[PredictionSet, ...]

    def __post_init__(self):
        if len(self.members) < 1:
            raise EnsembleMisaligned("ensemble needs at least one member")
        ms = tuple(validate(m) for m in self.members)
        first = ms[0]
        for i, m in enumerate(ms[1:], start=1):
            if m.n != first.n or m.k != first.k:
                raise EnsembleMisaligned(f"member {i} has shape ({m.n}, {m.k}), expected ({first.n}, {first.k})")
            if not np.array_equal(m.labels, first.labels):
                raise EnsembleMisaligned(f"member {i} labels differ from member 0")
        object.__setattr__(self, "members", ms)

    @classmethod
    def from_probs(cls, stack: np.ndarray, labels) -> "EnsemblePredictions":
        """Ensemble from an (M, N, K) probability array."""
        stack = np.asarray(stack)
        if stack.ndim != 3:
            raise EnsembleMisaligned(f"expected (M, N, K) array, got shape {stack.shape}")
        return cls(tuple(make_set(labels, probs=p) for p in stack))

    @property
    def m(self) -> int:
        return len(self.members)

    def probs_stack(self) -> np.ndarray:
        return np.stack([m.probs for m in self.members])


@dataclass(frozen=True)
class BinningConfig:
    m_bins: int = 10

    def __post_init__(self):
        if int(self.m_bins) != self.m_bins or self.m_bins < 1:
            raise ValueError(f"m_bins must be a positive integer, got {self.m_bins}")


@dataclass(frozen=True)
class SparsificationConfig:
    steps: int = 100
    max_fraction: float = 0.99

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")
        if not 0.0 < self.max_fraction < 1.0:
            raise ValueError(f"max_fraction must lie in (0, 1), got {self.max_fraction}")

    @property
    def fractions(self) -> np.ndarray:
        return np.linspace(0.0, self.max_fraction, self.steps)


@dataclass(frozen=True)
class TemperatureGrid:
    values: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if len(v) == 0:
            raise ValueError("temperature grid is empty")
        if any(not np.isfinite(x) or x <= 0 for x in v):
            raise ValueError("temperatures must be finite and > 0")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("temperatures must be strictly increasing")
        object.__setattr__(self, "values", v)

    @classmethod
    def arange(cls, t_min: float = 0.1, t_max: float = 10.0, step: float = 0.1) -> "TemperatureGrid":
        """Inclusive grid ``t_min, t_min+step, ..., t_max`` rounded to 10 decimals."""
        if step <= 0:
            raise ValueError("temperature step must be > 0")
        count = int(np.floor((t_max - t_min) / step + 1e-9)) + 1
        return cls(tuple(round(t_min + i * step, 10) for i in range(count)))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)


def as_class_list(s: PredictionSet, classes: Optional[Sequence[int]] = None) -> list[int]:
    """Classes present in the labels, or the given ids checked against K."""
    if classes is None:
        return [int(c) for c in np.unique(s.labels)]
    out = []
    for c in classes:
        if not 0 <= int(c) < s.k:
            raise LabelOutOfRange(f"class {c} outside [0, {s.k})")
        out.append(int(c))
    return out
