"""Per-instance uncertainty measures and aggregate proper scores.

All logarithms are natural; entropies are divided by ``log K`` so they land
in [0, 1] whatever the class count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PROB_FLOOR, PredictionSet

SCORE_KINDS = ("entropy", "variation_ratio", "cross_entropy", "confidence")


class UnknownKind(ValueError):
    pass


def _plogp(p: np.ndarray) -> np.ndarray:
    # 0 log 0 := 0; the floor only matters for p in (0, 1e-12)
    return p * np.log(np.clip(p, PROB_FLOOR, 1.0))


def normalized_entropy(p) -> np.ndarray | float:
    """Shannon entropy of each row of ``p`` divided by ``log K``.

    Accepts a single vector (returns a float) or an (N, K) matrix.
    """
    p = np.asarray(p, dtype=np.float64)
    k = p.shape[-1]
    h = -_plogp(p).sum(axis=-1) / np.log(k)
    h = np.clip(h, 0.0, 1.0)
    return float(h) if h.ndim == 0 else h


def variation_ratio(p) -> np.ndarray | float:
    p = np.asarray(p, dtype=np.float64)
    v = 1.0 - p.max(axis=-1)
    return float(v) if v.ndim == 0 else v


def cross_entropy_instance(p, label) -> np.ndarray | float:
    """``-log p[label]`` with the probability clamped to [1e-12, 1]."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 1:
        return float(-np.log(np.clip(p[int(label)], PROB_FLOOR, 1.0)))
    label = np.asarray(label)
    picked = p[np.arange(p.shape[0]), label]
    return -np.log(np.clip(picked, PROB_FLOOR, 1.0))


def brier_instance(p: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Squared distance between each row and the one-hot label."""
    onehot = np.zeros_like(p)
    onehot[np.arange(p.shape[0]), labels] = 1.0
    return ((p - onehot) ** 2).sum(axis=1)


def nll(s: PredictionSet) -> float:
    return float(np.mean(cross_entropy_instance(s.probs, s.labels)))


def brier(s: PredictionSet) -> float:
    return float(np.mean(brier_instance(s.probs, s.labels)))


def accuracy(s: PredictionSet) -> float:
    return float(np.mean(s.correct))


@dataclass(frozen=True, eq=False)
class ScoreVector:
    values: np.ndarray
    kind: str


def score_all(s: PredictionSet, kind: str) -> ScoreVector:
    if kind == "entropy":
        v = normalized_entropy(s.probs)
    elif kind == "variation_ratio":
        v = variation_ratio(s.probs)
    elif kind == "cross_entropy":
        v = cross_entropy_instance(s.probs, s.labels)
    elif kind == "confidence":
        v = s.probs.max(axis=1)
    else:
        raise UnknownKind(f"unknown score kind {kind!r}; expected one of {SCORE_KINDS}")
    return ScoreVector(np.asarray(v, dtype=np.float64), kind)
