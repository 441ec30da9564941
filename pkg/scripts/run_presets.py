#!/usr/bin/env python3
"""Run the four figure presets and report per-series monotonicity.

Usage: python3 scripts/run_presets.py [--trials N] [--out-dir DIR]
"""

import argparse
import time

from scipy.stats import spearmanr

from robust_spca.bench import PRESETS, preset, read_csv, series
from robust_spca.cli import cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    for name in PRESETS:
        t0 = time.perf_counter()
        code = cli_main(["bench", "--preset", name, "--trials", str(args.trials), "--out-dir", args.out_dir])
        if code:
            raise SystemExit(code)
        cfg = preset(name, args.trials)
        data = series(read_csv(f"{args.out_dir}/{name}.csv"), cfg.x)
        for algo, pts in data.items():
            rho = spearmanr([p.x for p in pts], [p.mean for p in pts])[0]
            mark = "*" if algo in cfg.working else " "
            print(f"{name} {mark}{algo:5s} spearman={rho:+.3f}")
        print(f"{name}: {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
