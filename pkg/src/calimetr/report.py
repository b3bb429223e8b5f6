"""Turn metric results into the JSON-ready sections of a report."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .decompose import DecompositionResult
from .io import file_digest
from .reliability import ReliabilityCurve
from .sparsification import AuseResult
from .synth import PRNG_ID
from .temper import ClasswiseTable, PairGap, SweepResult


def provenance(config: dict, inputs: Iterable = (), prng: Optional[str] = None) -> dict:
    """Input digests and configuration; no clocks or hostnames."""
    return {
        "tool": "calimetr",
        "version": __version__,
        "config": config,
        "inputs": [{"path": Path(p).name, "sha256": file_digest(p)} for p in inputs],
        "prng": prng or PRNG_ID,
    }


def curve_section(curve: ReliabilityCurve) -> dict:
    return {
        "mode": curve.mode,
        "skewness": curve.skewness,
        "bins": [
            {
                "lo": b.lo,
                "hi": b.hi,
                "count": b.count,
                "mean_measure": b.mean_measure,
                "outcome_rate": b.outcome_rate,
                "empty": b.empty,
            }
            for b in curve.bins
        ],
    }


def ause_section(res: AuseResult) -> dict:
    out = {
        "ause": res.ause,
        "sorter": res.sorter_kind,
        "merit": res.oracle.merit_kind,
        "class_id": res.class_id,
        "fractions": res.oracle.fractions,
        "oracle": res.oracle.values,
        "method": res.method.values,
        "negative_area_flag": res.negative_area_flag,
    }
    if res.method.vacuous is not None:
        out["vacuous_points"] = int(res.method.vacuous.sum() + res.oracle.vacuous.sum())
    return out


def sweep_section(res: SweepResult) -> dict:
    return {
        "grid": list(res.grid.values),
        "metrics": {k: v for k, v in res.metrics.items()},
        "normalized": {k: v for k, v in res.normalized.items()},
        "argmin_t": dict(res.argmin_t),
    }


def decoupling_section(report: dict[tuple[str, str], PairGap]) -> list:
    return [
        {"metrics": [a, b], "difference": g.difference, "grid_steps": g.grid_steps, "flagged": g.flagged}
        for (a, b), g in sorted(report.items())
    ]


def classwise_section(table: ClasswiseTable) -> dict:
    return {
        "rows": [
            {"class_id": r.class_id, "name": r.name, "count": r.count, "argmin_t": r.argmin_t} for r in table.rows
        ],
        "summary": {
            g: {m: {"mean": mu, "std": sd} for m, (mu, sd) in per.items()} for g, per in table.summary.items()
        },
    }


def decomposition_section(res: DecompositionResult, per_instance: bool = True) -> dict:
    out = {"means": res.means, "normalized": res.normalized}
    if per_instance:
        out.update(total=res.total, aleatoric=res.aleatoric, epistemic=res.epistemic)
    return out
