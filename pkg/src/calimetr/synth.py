"""Seeded synthetic prediction sets.

Rows are softmaxed Gaussian logits. Labels are drawn from the rows
themselves (calibrated by construction) or with a confidence-dependent
accuracy deficit (skewed fixtures). All randomness comes from one numpy
PCG64 stream per call, so a config reproduces its set bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import PredictionSet, softmax, validate
from .scores import normalized_entropy
from .temper import recover_logits

PRNG_ID = "numpy.random.PCG64"


class NonPositiveFactor(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    """``concentration`` works like a Dirichlet concentration: the logit
    standard deviation is ``1 / concentration``, so large values give
    near-uniform rows and small values near one-hot rows."""

    n: int = 10_000
    k: int = 5
    concentration: float = 0.5
    distortion: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.k < 2:
            raise ValueError(f"need n >= 1 and k >= 2, got n={self.n}, k={self.k}")
        if not self.concentration > 0:
            raise ValueError("concentration must be > 0")
        if not self.distortion > 0:
            raise NonPositiveFactor("distortion must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def _categorical(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """One draw per row by inverse CDF."""
    u = rng.random(probs.shape[0])
    cdf = np.cumsum(probs, axis=1)
    idx = (cdf < u[:, None] * cdf[:, -1:]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def distort(s: PredictionSet, g: float) -> PredictionSet:
    """Multiply the logits by ``g``; temperature ``g`` undoes it."""
    if not np.isfinite(g) or g <= 0:
        raise NonPositiveFactor(f"distortion factor must be > 0, got {g}")
    s = validate(s)
    return validate(PredictionSet(labels=s.labels, logits=recover_logits(s) * g, class_names=s.class_names))


def _finish(cfg: SynthConfig, logits: np.ndarray, labels: np.ndarray) -> PredictionSet:
    s = validate(PredictionSet(labels=labels, logits=logits))
    return s if cfg.distortion == 1.0 else distort(s, cfg.distortion)


def gen_calibrated(cfg: SynthConfig) -> PredictionSet:
    """Labels sampled from the predicted distribution of each row."""
    rng = cfg.rng()
    logits = rng.standard_normal((cfg.n, cfg.k)) / cfg.concentration
    labels = _categorical(rng, softmax(logits))
    return _finish(cfg, logits, labels)


SKEW_TARGETS = ("high_confidence", "high_uncertainty")


def _skew_logits(rng: np.random.Generator, cfg: SynthConfig, boost: float) -> np.ndarray:
    # one favoured class per row gets a logit bonus with a heavy lower tail
    logits = rng.standard_normal((cfg.n, cfg.k)) / cfg.concentration
    fav = rng.integers(0, cfg.k, cfg.n)
    bonus = boost * (1.0 - rng.beta(0.4, 4.0, cfg.n))
    logits[np.arange(cfg.n), fav] += bonus
    return logits


def gen_skewed(cfg: SynthConfig, skew_target: str = "high_confidence", boost: float | None = None) -> PredictionSet:
    """Predictions piled up in one extreme reliability bin.

    ``high_confidence`` puts most confidences in the top bin;
    ``high_uncertainty`` puts most normalized entropies in the bottom bin of
    the uncertainty diagram. The chance that the argmax is the label falls
    short of the confidence by a gap that widens as confidence drops, so the
    rarely populated bins are the badly calibrated ones.
    """
    if skew_target not in SKEW_TARGETS:
        raise ValueError(f"unknown skew target {skew_target!r}; expected one of {SKEW_TARGETS}")
    if boost is None:
        boost = 9.0 if skew_target == "high_confidence" else 13.0
    rng = cfg.rng()
    logits = _skew_logits(rng, cfg, boost)
    p = softmax(logits)
    pred = np.argmax(p, axis=1)
    conf = p[np.arange(cfg.n), pred]
    acc = np.clip(conf - 0.6 * (1.0 - conf) ** 1.5, 0.0, 1.0)
    hit = rng.random(cfg.n) < acc
    # misses go to another class in proportion to its probability
    rows = np.arange(cfg.n)
    others = p.copy()
    others[rows, pred] = 0.0
    others[others.sum(axis=1) == 0] = 1.0
    others[rows, pred] = 0.0
    wrong = _categorical(rng, others)
    labels = np.where(hit, pred, wrong)
    return _finish(cfg, logits, labels)


def extreme_bin_fraction(s: PredictionSet, skew_target: str, m_bins: int = 10) -> float:
    """Share of instances in the extreme bin named by ``skew_target``."""
    if skew_target == "high_confidence":
        return float(np.mean(s.confidences >= 1.0 - 1.0 / m_bins))
    return float(np.mean(normalized_entropy(s.probs) < 1.0 / m_bins))


def interpolate_rows(noisy: PredictionSet, target: PredictionSet, weight: float) -> PredictionSet:
    """Convex mix ``(1 - w) * noisy + w * target`` of two aligned sets' rows."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    if noisy.probs.shape != target.probs.shape:
        raise ValueError("sets are not aligned")
    probs = (1.0 - weight) * noisy.probs + weight * target.probs
    return validate(PredictionSet(labels=target.labels, probs=probs))


def with_seed(cfg: SynthConfig, seed: int) -> SynthConfig:
    return replace(cfg, seed=seed)
