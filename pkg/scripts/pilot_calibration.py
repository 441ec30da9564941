#!/usr/bin/env python3
"""Pilot sweeps behind the frozen acceptance settings.

Sweeps the adversary strength for the DT, CT and SDP regimes and the signal
strength for the clean DT and SVD regimes, printing mean corr2 per point.

Usage: python3 scripts/pilot_calibration.py [--trials N] [--which dt,ct,svd,sdp]
"""

import argparse
import math

import numpy as np

from robust_spca.bench import ExperimentConfig, run_experiment


def mean_corr(n, d, k, beta, algo, adversary, trials, seed=1):
    cfg = ExperimentConfig.from_dict({
        "name": "pilot", "form": "wishart", "trials": trials, "seed": seed, "timing": False,
        "grid": {"n": [n], "d": [d], "k": [k], "beta": [beta]},
        "algorithms": [algo], "adversary": adversary,
    })
    return float(np.mean([r.corr2 for r in run_experiment(cfg)]))


def sweep(label, n, d, k, beta, algo, adversaries, trials):
    for adv in adversaries:
        print(f"{label} n={n} d={d} k={k} beta={beta:.3f} adv={adv}: {mean_corr(n, d, k, beta, algo, adv, trials):.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=6)
    ap.add_argument("--which", default="dt,ct,svd,sdp")
    args = ap.parse_args()
    which = set(args.which.split(","))
    t = args.trials
    if "dt" in which:
        n, d, k = 100, 2000, 30
        base = k / math.sqrt(n) * math.sqrt(math.log(d))
        for mult in (2, 3, 4):
            sweep("dt-clean", n, d, k, mult * base, "dt", [{"type": "none"}], t)
        sweep("dt-adv", n, d, k, 2 * base, "dt", [{"type": "dt", "b_rule": "dt", "b_factor": f} for f in (0.5, 1, 4)], t)
    if "ct" in which:
        n, d, k = 900, 900, 28
        beta = 3 * k / math.sqrt(n)
        sweep("ct", n, d, k, beta, "ct",
              [{"type": "none"}] + [{"type": "ct", "b": b, "r_rule": "2lnd"} for b in (3.34, 5, 7, 10)], t)
    if "svd" in which:
        n, d, k = 200, 2000, 40
        for beta in (5, 10, 20):
            sweep("svd", n, d, k, beta, "svd", [{"type": "none"}, {"type": "whitening"}], t)
    if "sdp" in which:
        n, d, k = 100, 300, 10
        beta = 3 * k / math.sqrt(n) * math.sqrt(math.log(d))
        advs = [{"type": "dt", "b": b} for b in (0, 2, 4, 6, 9)]
        sweep("sdp", n, d, k, beta, "sdp", advs, max(2, t // 2))
        sweep("sdp-dt", n, d, k, beta, "dt", advs, max(2, t // 2))


if __name__ == "__main__":
    main()
