"""Equal-width reliability binning and the ECE / UCE / CCQS / UCQS metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BinningConfig, CalibrationDataError, PredictionSet
from .scores import normalized_entropy

# Largest possible area between a reliability curve and the diagonal.
MAX_AREA = 0.25


class WrongMode(ValueError):
    pass


class NoData(CalibrationDataError):
    pass


class DegenerateDistribution(CalibrationDataError):
    pass


@dataclass(frozen=True)
class BinStats:
    lo: float
    hi: float
    count: int
    mean_measure: float
    outcome_rate: float

    @property
    def empty(self) -> bool:
        return self.count == 0


@dataclass(frozen=True)
class ReliabilityCurve:
    bins: tuple[BinStats, ...]
    mode: str  # "confidence" or "uncertainty"
    skewness: Optional[float]

    @property
    def n(self) -> int:
        return sum(b.count for b in self.bins)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(b.mean_measure, b.outcome_rate) for b in self.bins if not b.empty]

    @property
    def gaps(self) -> list[float]:
        """Signed outcome-minus-measure gap of every non-empty bin."""
        return [b.outcome_rate - b.mean_measure for b in self.bins if not b.empty]


def bin_index(values: np.ndarray, m_bins: int) -> np.ndarray:
    """Bin of each value in [0, 1]: ``[m/M, (m+1)/M)``, last bin closed.

    The floor guess is corrected against the exact edges ``m/M`` so the
    assignment never disagrees with a direct comparison.
    """
    v = np.asarray(values, dtype=np.float64)
    idx = np.clip(np.floor(v * m_bins).astype(np.int64), 0, m_bins - 1)
    lo = idx / m_bins
    idx = np.where((v < lo) & (idx > 0), idx - 1, idx)
    hi = (idx + 1) / m_bins
    idx = np.where((v >= hi) & (idx < m_bins - 1), idx + 1, idx)
    return idx


def _bin(measure: np.ndarray, outcome: np.ndarray, cfg: BinningConfig, mode: str) -> ReliabilityCurve:
    m = cfg.m_bins
    idx = bin_index(measure, m)
    counts = np.bincount(idx, minlength=m)
    msum = np.bincount(idx, weights=measure, minlength=m)
    osum = np.bincount(idx, weights=outcome.astype(np.float64), minlength=m)
    bins = []
    for b in range(m):
        c = int(counts[b])
        if c:
            bins.append(BinStats(b / m, (b + 1) / m, c, float(msum[b] / c), float(osum[b] / c)))
        else:
            bins.append(BinStats(b / m, (b + 1) / m, 0, 0.0, 0.0))
    try:
        sk = skewness(measure)
    except DegenerateDistribution:
        sk = None
    return ReliabilityCurve(tuple(bins), mode, sk)


def bin_confidence(s: PredictionSet, cfg: BinningConfig = BinningConfig()) -> ReliabilityCurve:
    return _bin(s.confidences, s.correct, cfg, "confidence")


def bin_uncertainty(s: PredictionSet, cfg: BinningConfig = BinningConfig()) -> ReliabilityCurve:
    return _bin(normalized_entropy(s.probs), ~s.correct, cfg, "uncertainty")


def _weighted_gap(curve: ReliabilityCurve) -> float:
    n = curve.n
    return float(sum(b.count / n * abs(b.outcome_rate - b.mean_measure) for b in curve.bins if not b.empty))


def ece(curve: ReliabilityCurve) -> float:
    if curve.mode != "confidence":
        raise WrongMode(f"ECE needs a confidence curve, got {curve.mode!r}")
    return _weighted_gap(curve)


def uce(curve: ReliabilityCurve) -> float:
    if curve.mode != "uncertainty":
        raise WrongMode(f"UCE needs an uncertainty curve, got {curve.mode!r}")
    return _weighted_gap(curve)


def area_to_diagonal(points) -> float:
    """Exact area between the polyline through ``points`` and ``y = x``.

    Each segment's signed distance to the diagonal is linear, so segments
    that cross the diagonal are split at the crossing before the trapezoid.
    """
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        w = x1 - x0
        if w <= 0:
            continue
        d0, d1 = y0 - x0, y1 - x1
        if d0 * d1 >= 0:
            area += 0.5 * w * (abs(d0) + abs(d1))
        else:
            area += 0.5 * w * (d0 * d0 + d1 * d1) / (abs(d0) + abs(d1))
    return area


def calibration_quality_score(curve: ReliabilityCurve) -> float:
    """CCQS for confidence curves, UCQS for uncertainty curves.

    ``1 - A / 0.25`` where ``A`` is the area between the diagonal and the
    polyline through the non-empty bin points anchored at (0, 0) and (1, 1).
    """
    pts = curve.points
    if not pts:
        raise NoData("reliability curve has no populated bins")
    poly = [(0.0, 0.0)] + sorted(pts) + [(1.0, 1.0)]
    score = 1.0 - area_to_diagonal(poly) / MAX_AREA
    return float(min(1.0, max(0.0, score)))


def skewness(values) -> float:
    """Third standardized central moment ``m3 / m2**1.5`` (population moments)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise DegenerateDistribution("skewness needs at least two values")
    d = v - v.mean()
    m2 = np.mean(d * d)
    scale = max(1.0, float(np.max(np.abs(v))))
    if m2 <= (1e-12 * scale) ** 2:
        raise DegenerateDistribution("values have zero variance")
    m3 = np.mean(d * d * d)
    return float(m3 / m2**1.5)
