"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line; the lines are repeated in
the terminal summary so they survive output capture.
"""

import itertools
import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from calimetr.cli import run
from calimetr.core import BinningConfig, EnsemblePredictions, SparsificationConfig, TemperatureGrid, make_set
from calimetr.decompose import decompose
from calimetr.io import decode_tensor, dumps_report, encode_tensor, read_report, write_report
from calimetr.reliability import bin_confidence, bin_uncertainty, calibration_quality_score, ece, uce
from calimetr.scores import accuracy, normalized_entropy
from calimetr.sparsification import ause, ause_ce, oracle_order, sparsification_curve
from calimetr.synth import SynthConfig, distort, gen_calibrated, gen_skewed, interpolate_rows
from calimetr.temper import apply_temperature, decoupling_report, sweep


def verdict(num: int, ok: bool, detail: str, started: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail} ({time.perf_counter() - started:.1f}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def calibrated():
    return gen_calibrated(SynthConfig(n=100_000, k=5, seed=0))


def test_criterion_1_entropy_bracket():
    t0 = time.perf_counter()
    a = float(normalized_entropy([0.95, 0.05, 0.0]))
    b = float(normalized_entropy([0.95, 0.025, 0.025]))
    ok = abs(a - 0.1807) < 1e-3 and abs(b - 0.2122) < 1e-3
    verdict(1, ok, f"H(.95,.05,0)={a:.4f} (0.1807), H(.95,.025,.025)={b:.4f} (0.2122), tol 1e-3", t0)


def test_criterion_2_argmax_invariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    z = rng.standard_normal((10_000, 5)) * rng.uniform(0.1, 10, (10_000, 1))
    y = rng.integers(0, 5, 10_000)
    s = make_set(y, logits=z)
    temps = rng.uniform(0.1, 10, 20)
    kept = [np.mean(apply_temperature(s, t).predictions == s.predictions) for t in temps]
    accs = {accuracy(apply_temperature(s, t)) for t in temps} | {accuracy(s)}
    ok = min(kept) == 1.0 and len(accs) == 1
    verdict(2, ok, f"argmax preserved in {100 * min(kept):.2f}% of 10^4 x 20 cases, {len(accs)} distinct accuracy", t0)


def test_criterion_3_decomposition_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    shapes = list(itertools.product((1, 2, 5, 16), (2, 3, 19)))
    worst, worst_m1 = 0.0, 0.0
    for i in range(1000):
        m, k = shapes[i % len(shapes)]
        z = rng.standard_normal((m, 8, k)) * rng.uniform(0.1, 8)
        p = np.exp(z - z.max(-1, keepdims=True))
        p /= p.sum(-1, keepdims=True)
        r = decompose(EnsemblePredictions.from_probs(p, rng.integers(0, k, 8)))
        worst = max(worst, float(np.abs(r.total - r.aleatoric - r.epistemic).max()))
        if m == 1:
            worst_m1 = max(worst_m1, float(np.abs(r.epistemic).max()))
    ok = worst <= 1e-9 and worst_m1 == 0.0
    verdict(3, ok, f"max |total - aleatoric - epistemic| = {worst:.2e} (tol 1e-9), max M=1 epistemic = {worst_m1}", t0)


def test_criterion_4_oracle_optimality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    cfg = SparsificationConfig()
    violations, checked, oracle_ause = 0, 0, 0.0
    for n in range(1, 8):
        for _ in range(3 if n == 7 else 6):
            k = int(rng.integers(2, 5))
            z = rng.standard_normal((n, k)) * 2
            s = make_set(rng.integers(0, k, n), logits=z)
            best = sparsification_curve(s, oracle_order(s), "accuracy", cfg).values
            for perm in itertools.permutations(range(n)):
                vals = sparsification_curve(s, np.array(perm), "accuracy", cfg).values
                violations += int(np.any(vals > best + 1e-15))
                checked += 1
            oracle_ause = max(oracle_ause, abs(ause(s, "oracle", "accuracy", cfg).ause))
    ok = violations == 0 and oracle_ause == 0.0
    verdict(4, ok, f"{checked} permutations, {violations} curves above the oracle, oracle AUSE {oracle_ause}", t0)


def test_criterion_5_brute_force_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    cfg = SparsificationConfig(100, 0.99)
    worst = 0.0
    for _ in range(50):
        n, k = int(rng.integers(1, 21)), int(rng.integers(2, 5))
        z = rng.standard_normal((n, k)) * rng.choice([0.3, 1.0, 4.0])
        s = make_set(rng.integers(0, k, n), logits=z)
        P, Y = s.probs.tolist(), s.labels.tolist()
        conf, unc = bin_confidence(s), bin_uncertainty(s)
        pairs = [
            (ece(conf), oracles.ece(P, Y)),
            (uce(unc), oracles.uce(P, Y)),
            (calibration_quality_score(conf), oracles.ccqs(P, Y)),
            (calibration_quality_score(unc), oracles.ucqs(P, Y)),
        ]
        for sorter in ("variation_ratio", "entropy", "cross_entropy"):
            pairs.append((ause(s, sorter, "accuracy", cfg).ause, oracles.ause(P, Y, sorter, "accuracy")))
            for c in sorted(set(Y)):
                got = ause(s, sorter, "iou", cfg, class_id=c).ause
                pairs.append((got, oracles.ause(P, Y, sorter, "iou", cls=c)))
        worst = max(worst, max(abs(a - b) for a, b in pairs))
    verdict(5, worst <= 1e-12, f"max deviation from reference over 50 sets = {worst:.2e} (tol 1e-12)", t0)


def test_criterion_6_statistical_calibration(calibrated):
    t0 = time.perf_counter()
    cfg = BinningConfig(10)
    conf, unc = bin_confidence(calibrated, cfg), bin_uncertainty(calibrated, cfg)
    e, u, q = ece(conf), uce(unc), calibration_quality_score(conf)
    ok = e < 0.015 and u < 0.015 and q > 0.95
    verdict(6, ok, f"ECE={e:.4f} (<0.015), UCE={u:.4f} (<0.015), CCQS={q:.4f} (>0.95)", t0)


def test_criterion_7_temperature_recovery(calibrated):
    t0 = time.perf_counter()
    grid = TemperatureGrid.arange(0.1, 10.0, 0.1)
    parts, ok = [], True
    for g in (0.5, 2.0):
        r = sweep(distort(calibrated, g), grid, ["nll", "brier", "ece"])
        t = r.argmin_t
        ok &= abs(t["nll"] - g) <= 0.1 + 1e-9 and abs(t["brier"] - g) <= 0.3 + 1e-9 and abs(t["ece"] - g) <= 0.3 + 1e-9
        parts.append(f"g={g}: nll {t['nll']}, brier {t['brier']}, ece {t['ece']}")
    verdict(7, ok, "; ".join(parts), t0)


def test_criterion_8_decoupling_exists():
    t0 = time.perf_counter()
    s = gen_skewed(SynthConfig(n=10_000, k=5, seed=0))
    r = sweep(s, TemperatureGrid.arange(), ["nll", "ece", "ccqs", "ause_v"])
    flagged = [f"{a}/{b} {g.grid_steps} steps" for (a, b), g in decoupling_report(r).items() if g.flagged]
    optima = ", ".join(f"{m} {t}" for m, t in sorted(r.argmin_t.items()))
    verdict(8, bool(flagged), f"optima {optima}; flagged: {'; '.join(flagged) or 'none'}", t0)


def test_criterion_9_ause_ce_monotone():
    t0 = time.perf_counter()
    target = gen_calibrated(SynthConfig(n=20_000, k=5, seed=0))
    untrained = gen_calibrated(SynthConfig(n=20_000, k=5, concentration=5.0, seed=1000))
    vals = [ause_ce(interpolate_rows(untrained, target, w), "accuracy").ause for w in (0.0, 0.25, 0.5, 0.75)]
    ok = all(b <= a for a, b in zip(vals, vals[1:]))
    verdict(9, ok, "AUSE_CE at w=0,.25,.5,.75: " + ", ".join(f"{v:.5f}" for v in vals), t0)


def test_criterion_10_round_trip_and_determinism(tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    arr = rng.standard_normal((7, 3)).astype(np.float32)
    buf = encode_tensor(arr, "logits", ["a", "b", "c"], {"seed": 10})
    back, header = decode_tensor(buf)
    tensor_ok = back.tobytes() == arr.tobytes() and encode_tensor(back, "logits", header["class_names"], header["meta"]) == buf
    doc = {"metrics": {"x": float(rng.random())}, "provenance": {"tool": "t", "version": "0", "config": {}, "inputs": [], "prng": "p"}}
    write_report(doc, tmp_path / "r1.json")
    write_report(read_report(tmp_path / "r1.json"), tmp_path / "r2.json")
    report_ok = (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes() == dumps_report(doc).encode()

    data = tmp_path / "data"
    run(["synth", "--out", str(data), "--n", "400", "--k", "3", "--seed", "3"])
    inputs = ["--inputs", str(data / "preds.cal"), str(data / "labels.cal")]
    commands = {
        "synth": ["synth", "--n", "400", "--k", "3", "--seed", "3"],
        "report": ["report", *inputs],
        "sweep": ["sweep", *inputs, "--temp-max", "2", "--classwise"],
        "ause": ["ause", *inputs],
        "decompose": ["decompose", "--inputs", str(data / "preds.cal"), str(data / "preds.cal"), str(data / "labels.cal")],
    }
    same = {}
    for name, argv in commands.items():
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / name / rep
            code = run([*argv, "--out", str(out), "--format", "json+svg"])
            outs.append((code, {p.name: p.read_bytes() for p in sorted(out.iterdir())}))
        same[name] = outs[0] == outs[1] and outs[0][0] == 0
    plots = []
    for rep in ("a", "b"):
        out = tmp_path / "plot" / rep
        run(["plot", "--inputs", str(tmp_path / "report" / "a" / "report.json"), "--out", str(out)])
        plots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same["plot"] = plots[0] == plots[1] and bool(plots[0])
    ok = tensor_ok and report_ok and all(same.values())
    cli = ", ".join(f"{k} {'ok' if v else 'DIFF'}" for k, v in same.items())
    verdict(10, ok, f"tensor {'ok' if tensor_ok else 'DIFF'}, report {'ok' if report_ok else 'DIFF'}, CLI reruns: {cli}", t0)
