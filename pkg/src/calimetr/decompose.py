"""Ensemble marginal and the total = aleatoric + epistemic entropy split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PROB_FLOOR, EnsemblePredictions, PredictionSet, validate


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    total: np.ndarray
    aleatoric: np.ndarray
    epistemic: np.ndarray
    normalized: bool = True

    @property
    def means(self) -> dict[str, float]:
        return {
            "total": float(self.total.mean()),
            "aleatoric": float(self.aleatoric.mean()),
            "epistemic": float(self.epistemic.mean()),
        }


def marginal(ens: EnsemblePredictions) -> PredictionSet:
    """Uniformly weighted average of the member distributions."""
    first = ens.members[0]
    mean = ens.probs_stack().mean(axis=0)
    return validate(PredictionSet(labels=first.labels, probs=mean, class_names=first.class_names))


def _log(p: np.ndarray) -> np.ndarray:
    return np.log(np.clip(p, PROB_FLOOR, 1.0))


def decompose(ens: EnsemblePredictions, normalize: bool = True) -> DecompositionResult:
    """Per-instance entropy decomposition of an ensemble.

    ``total`` is the entropy of the marginal, ``aleatoric`` the mean member
    entropy and ``epistemic`` the mean KL divergence of members from the
    marginal. With ``normalize`` all three are divided by ``log K``.
    """
    stack = ens.probs_stack()  # (M, N, K)
    q = stack.mean(axis=0)
    log_q = _log(q)
    plogp = stack * _log(stack)
    total = -(q * log_q).sum(axis=-1)
    aleatoric = -plogp.sum(axis=-1).mean(axis=0)
    kl = (plogp - stack * log_q[None]).sum(axis=-1)
    epistemic = np.maximum(kl, 0.0).mean(axis=0)
    if normalize:
        scale = np.log(stack.shape[-1])
        total, aleatoric, epistemic = total / scale, aleatoric / scale, epistemic / scale
    return DecompositionResult(total, aleatoric, epistemic, normalize)
