"""Command-line frontend.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import report as rep
from .core import BinningConfig, CalibrationDataError, EnsemblePredictions, SparsificationConfig, TemperatureGrid
from .decompose import decompose, marginal
from .io import (
    TensorFileError,
    UnwritablePath,
    predictions_from_tensors,
    read_csv_predictions,
    read_report,
    read_tensor,
    write_prediction_set,
    write_report,
)
from .reliability import bin_confidence, bin_uncertainty, calibration_quality_score, ece, uce
from .scores import accuracy, brier, nll
from .sparsification import SORTERS, ause_classwise
from .svg import render_svg
from .synth import PRNG_ID, SynthConfig, gen_calibrated, gen_skewed
from .temper import METRICS, MetricOptions, classwise_table, decoupling_report, evaluate_metrics, sweep

SORTER_FLAGS = {"vr": "variation_ratio", "entropy": "entropy", "ce": "cross_entropy", "oracle": "oracle"}
SYNTH_KINDS = {"calibrated": None, "skewed-confidence": "high_confidence", "skewed-uncertainty": "high_uncertainty"}


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _class_arg(text: str):
    if text == "all":
        return "all"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--class takes a class id or 'all', got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("class id must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--inputs", nargs="+", default=[], help="tensor files (.cal), a CSV, or reports for plot")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--format", choices=("json", "json+svg"), default="json")
    common.add_argument("--bins", type=_positive_int, default=10)
    common.add_argument("--temp-min", type=float, default=0.1)
    common.add_argument("--temp-max", type=float, default=10.0)
    common.add_argument("--temp-step", type=float, default=0.1)
    common.add_argument("--sorter", choices=tuple(SORTER_FLAGS), default="vr")
    common.add_argument("--merit", choices=("iou", "accuracy", "brier"), default="iou")
    common.add_argument("--steps", type=int, default=100)
    common.add_argument("--max-fraction", type=float, default=0.99)
    common.add_argument("--class", dest="class_id", type=_class_arg, default="all")
    common.add_argument("--holistic", action="store_true", help="pool classes for ECE/UCE instead of averaging")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="calimetr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("report", parents=[common], help="all scalar metrics at T=1")
    sw = sub.add_parser("sweep", parents=[common], help="metrics over a temperature grid")
    sw.add_argument("--metrics", default=",".join(METRICS), help="comma separated subset of " + ",".join(METRICS))
    sw.add_argument("--classwise", action="store_true", help="also tabulate per-class optimal temperatures")
    sub.add_parser("ause", parents=[common], help="per-class sparsification curves and AUSE")
    dp = sub.add_parser("decompose", parents=[common], help="entropy decomposition of an ensemble")
    dp.add_argument("--no-normalize", action="store_true", help="report nats instead of dividing by log K")
    sy = sub.add_parser("synth", parents=[common], help="write a synthetic prediction set")
    sy.add_argument("--kind", choices=tuple(SYNTH_KINDS), default="calibrated")
    sy.add_argument("--n", type=_positive_int, default=10_000)
    sy.add_argument("--k", type=int, default=5)
    sy.add_argument("--concentration", type=float, default=0.5)
    sy.add_argument("--distortion", type=float, default=1.0)
    sub.add_parser("plot", parents=[common], help="render SVG figures from report files")
    return p


def _check(args) -> None:
    if not args.temp_min > 0:
        raise UsageError("--temp-min must be > 0")
    if not args.temp_max >= args.temp_min:
        raise UsageError("--temp-max must be >= --temp-min")
    if not args.temp_step > 0:
        raise UsageError("--temp-step must be > 0")
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if not 0 < args.max_fraction < 1:
        raise UsageError("--max-fraction must lie in (0, 1)")
    if args.command == "synth":
        if args.k < 2 or not args.concentration > 0 or not args.distortion > 0:
            raise UsageError("synth needs --k >= 2 and positive --concentration and --distortion")
        if not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
    elif not args.inputs:
        raise UsageError(f"{args.command} needs --inputs")
    if args.command == "sweep":
        bad = [m for m in args.metrics.split(",") if m not in METRICS]
        if bad:
            raise UsageError(f"unknown metrics: {','.join(bad)}")


def _config(args) -> dict:
    keys = ["command", "bins", "temp_min", "temp_max", "temp_step", "sorter", "merit", "steps", "max_fraction",
            "class_id", "holistic", "seed", "format"]
    extra = {"sweep": ["metrics", "classwise"], "decompose": ["no_normalize"],
             "synth": ["kind", "n", "k", "concentration", "distortion"]}
    return {k: getattr(args, k) for k in keys + extra.get(args.command, [])}


def _load_tensors(paths) -> tuple[list, Optional[np.ndarray]]:
    preds, labels = [], None
    for path in paths:
        arr, header = read_tensor(path)
        if header["role"] == "labels":
            if labels is not None:
                raise CalibrationDataError("more than one labels file given")
            labels = arr
        else:
            preds.append((arr, header))
    return preds, labels


def load_predictions(paths):
    if len(paths) == 1 and str(paths[0]).lower().endswith(".csv"):
        return read_csv_predictions(paths[0])
    preds, labels = _load_tensors(paths)
    if labels is None or len(preds) != 1:
        raise CalibrationDataError("expected one logits/probs tensor and one labels tensor")
    return predictions_from_tensors(*preds[0], labels)


def _options(args) -> MetricOptions:
    return MetricOptions(BinningConfig(args.bins), SparsificationConfig(args.steps, args.max_fraction), args.merit,
                         args.holistic)


def _classes(args, s) -> Optional[list[int]]:
    if args.class_id == "all":
        return None
    if args.class_id >= s.k:
        raise CalibrationDataError(f"class {args.class_id} outside [0, {s.k})")
    return [args.class_id]


def cmd_report(args, out: Path) -> None:
    s = load_predictions(args.inputs)
    opts = _options(args)
    conf, unc = bin_confidence(s, opts.binning), bin_uncertainty(s, opts.binning)
    metrics = {
        "ece": ece(conf), "uce": uce(unc),
        "ccqs": calibration_quality_score(conf), "ucqs": calibration_quality_score(unc),
        "nll": nll(s), "brier": brier(s), "accuracy": accuracy(s),
    }
    if not args.holistic:
        metrics.update({f"mean_class_{m}": v for m, v in evaluate_metrics(s, ("ece", "uce"), opts).items()})
    metrics.update(evaluate_metrics(s, ("ause_v", "ause_s", "ause_ce"), opts, _classes(args, s)))
    doc = {
        "metrics": metrics,
        "reliability": {"confidence": rep.curve_section(conf), "uncertainty": rep.curve_section(unc)},
        "provenance": rep.provenance(_config(args), args.inputs),
    }
    _emit(args, out, "report", doc)


def cmd_sweep(args, out: Path) -> None:
    s = load_predictions(args.inputs)
    opts = _options(args)
    grid = TemperatureGrid.arange(args.temp_min, args.temp_max, args.temp_step)
    metrics = args.metrics.split(",")
    res = sweep(s, grid, metrics, opts, _classes(args, s))
    doc = {
        "sweep": rep.sweep_section(res),
        "decoupling": rep.decoupling_section(decoupling_report(res)),
        "provenance": rep.provenance(_config(args), args.inputs),
    }
    if args.classwise:
        doc["classwise"] = rep.classwise_section(classwise_table(s, grid, metrics, opts))
    _emit(args, out, "sweep", doc)


def cmd_ause(args, out: Path) -> None:
    s = load_predictions(args.inputs)
    opts = _options(args)
    results = ause_classwise(s, SORTER_FLAGS[args.sorter], args.merit, opts.sparsification, _classes(args, s))
    sections = {("global" if c == -1 else f"class_{c}"): rep.ause_section(r) for c, r in results.items()}
    doc = {
        "metrics": {f"ause_{k}": v["ause"] for k, v in sections.items()},
        "sparsification": sections,
        "provenance": rep.provenance(_config(args), args.inputs),
    }
    _emit(args, out, "ause", doc)


def cmd_decompose(args, out: Path) -> None:
    preds, labels = _load_tensors(args.inputs)
    if labels is None or not preds:
        raise CalibrationDataError("decompose needs a labels tensor and at least one member tensor")
    ens = EnsemblePredictions(tuple(predictions_from_tensors(a, h, labels) for a, h in preds))
    res = decompose(ens, normalize=not args.no_normalize)
    # residual-uncertainty estimate of the marginal, reported next to the entropy terms
    q = marginal(ens)
    residual = evaluate_metrics(q, ("ause_ce",), _options(args), _classes(args, q))["ause_ce"]
    doc = {
        "metrics": {f"{k}_mean": v for k, v in res.means.items()} | {"members": ens.m, "ause_ce_marginal": residual},
        "decomposition": rep.decomposition_section(res),
        "provenance": rep.provenance(_config(args), args.inputs),
    }
    _emit(args, out, "decomposition", doc)


def cmd_synth(args, out: Path) -> None:
    cfg = SynthConfig(args.n, args.k, args.concentration, args.distortion, args.seed)
    target = SYNTH_KINDS[args.kind]
    s = gen_calibrated(cfg) if target is None else gen_skewed(cfg, target)
    meta = {"prng": PRNG_ID, "seed": args.seed, "kind": args.kind}
    paths = write_prediction_set(out, s, meta)
    doc = {
        "metrics": {"accuracy": accuracy(s), "nll": nll(s), "brier": brier(s)},
        "synth": {"kind": args.kind, "files": [p.name for p in paths]},
        "provenance": rep.provenance(_config(args), paths),
    }
    _emit(args, out, "synth", doc)


def figures_from_report(doc: dict) -> dict[str, tuple[str, dict]]:
    """Figure name -> (figure kind, data) for every plottable section of a report."""
    figs = {}
    for name, curve in sorted(doc.get("reliability", {}).items()):
        figs[f"reliability_{name}"] = ("reliability", curve)
    for name, sec in sorted(doc.get("sparsification", {}).items()):
        figs[f"sparsification_{name}"] = ("sparsification", sec)
    if "sweep" in doc:
        figs["loss_surface"] = ("loss_surface", doc["sweep"])
    if "runs" in doc:
        figs["ause_over_runs"] = ("ause_over_runs", doc["runs"])
    return figs


def _emit(args, out: Path, stem: str, doc: dict) -> None:
    write_report(doc, out / f"{stem}.json")
    if args.format == "json+svg":
        for name, (kind, data) in figures_from_report(doc).items():
            render_svg(kind, data, out / f"{name}.svg")


def cmd_plot(args, out: Path) -> None:
    for path in args.inputs:
        doc = read_report(path)
        for name, (kind, data) in figures_from_report(doc).items():
            render_svg(kind, data, out / f"{Path(path).stem}_{name}.svg")


COMMANDS = {
    "report": cmd_report,
    "sweep": cmd_sweep,
    "ause": cmd_ause,
    "decompose": cmd_decompose,
    "synth": cmd_synth,
    "plot": cmd_plot,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _check(args)
    except UsageError as e:
        print(f"calimetr {args.command}: usage error: {e}", file=sys.stderr)
        return 2
    try:
        COMMANDS[args.command](args, Path(args.out))
    except (CalibrationDataError, TensorFileError, UnwritablePath, OSError, ValueError) as e:
        msg = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"calimetr {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
