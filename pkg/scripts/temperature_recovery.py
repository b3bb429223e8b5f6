"""Distort a calibrated synthetic set by g and check which temperature each metric picks."""

import argparse

from calimetr.core import TemperatureGrid
from calimetr.synth import SynthConfig, distort, gen_calibrated
from calimetr.temper import sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--factors", type=float, nargs="+", default=[0.5, 1.0, 2.0, 4.0])
    ap.add_argument("--metrics", default="nll,brier,ece,ccqs")
    args = ap.parse_args()

    base = gen_calibrated(SynthConfig(n=args.n, k=args.k, seed=args.seed))
    grid = TemperatureGrid.arange()
    metrics = args.metrics.split(",")
    print("g      " + "  ".join(f"{m:>6}" for m in metrics))
    for g in args.factors:
        r = sweep(distort(base, g), grid, metrics)
        print(f"{g:<6} " + "  ".join(f"{r.argmin_t[m]:>6.1f}" for m in metrics))


if __name__ == "__main__":
    main()
