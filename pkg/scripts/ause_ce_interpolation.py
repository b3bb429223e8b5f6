"""AUSE_CE along a path from a near-uniform "untrained" set to a calibrated one.

Stands in for watching a model over training epochs: each step mixes more of
the calibrated rows into the untrained ones.
"""

import argparse
from pathlib import Path

from calimetr.synth import SynthConfig, gen_calibrated, interpolate_rows
from calimetr.sparsification import ause_ce
from calimetr.svg import render_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--weights", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 1.0])
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    series = {}
    for seed in args.seeds:
        target = gen_calibrated(SynthConfig(n=args.n, k=args.k, seed=seed))
        untrained = gen_calibrated(SynthConfig(n=args.n, k=args.k, concentration=5.0, seed=seed + 1000))
        vals = [ause_ce(interpolate_rows(untrained, target, w), "accuracy").ause for w in args.weights]
        series[f"seed {seed}"] = vals
        mono = all(b <= a for a, b in zip(vals, vals[1:]))
        print(f"seed {seed}: " + " ".join(f"{v:.5f}" for v in vals) + ("" if mono else "  (not monotone)"))

    if args.out:
        render_svg("ause_over_runs", {"runs": [f"w={w:g}" for w in args.weights], "series": series},
                   args.out / "ause_ce_interpolation.svg")


if __name__ == "__main__":
    main()
