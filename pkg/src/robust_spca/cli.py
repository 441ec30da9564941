"""Command-line interface: ``robust-spca <gen|solve|bench|plot|moments|lowdeg>``."""

import argparse
import json
import math
import os
import sys

import numpy as np

from .adversary import CtFool, DtFool, Whitening, build_moment_distribution
from .core import corr2
from .errors import InputError, SpcaError
from .estimators import ALGORITHMS, EstimatorOptions
from .lowdeg import (
    GAUSSIAN,
    MultiIndex,
    UMomentSpec,
    chi2_bound_terms,
    chi2_multilinear_exact,
    hermite_expectation_planted,
    mc_hermite_expectation,
    planted_sampler,
)
from .model import ModelParams, describe, load_instance, sample_subspace_instance, sample_wishart_instance, save_instance
from .polyest import ColorCodingParams, choose_poly_params, poly_estimator
from .rng import make_rng
from .sdp import SdpOptions, sdp_estimate


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _s_mode(text):
    return text if text == "auto" else _positive_int(text)


def _build_parser():
    p = argparse.ArgumentParser(prog="robust-spca", description="Robust sparse PCA toolkit.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("gen", help="sample an instance and write it in SPCA1 format")
    g.add_argument("--form", choices=("wishart", "subspace"), default="wishart")
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--d", type=_positive_int, required=True)
    g.add_argument("--k", type=_positive_int, help="sparsity (wishart)")
    g.add_argument("--beta", type=float, help="signal strength (wishart)")
    g.add_argument("--signal-mode", choices=("flat", "general"), default="flat")
    g.add_argument("--adversary", choices=("none", "whitening", "dt", "ct"), default="none")
    g.add_argument("--b", type=float, default=0.0, help="adversary column-norm budget")
    g.add_argument("--r", type=_positive_int, default=1, help="CT adversary block count")
    g.add_argument("--lam", type=float, help="planted row scale (subspace)")
    g.add_argument("--delta", type=float, help="support density (subspace)")
    g.add_argument("--s", type=_s_mode, default="auto", help="matched moment order or 'auto'")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="run one estimator on a saved instance")
    s.add_argument("--input", required=True)
    s.add_argument("--algo", choices=tuple(ALGORITHMS) + ("sdp", "poly"), required=True)
    s.add_argument("--k", type=_positive_int, help="sparsity (defaults to the stored k)")
    s.add_argument("--tau", type=float)
    s.add_argument("--output-mode", choices=("top_k", "threshold"), default="top_k")
    s.add_argument("--max-iter", type=_positive_int, default=5000)
    s.add_argument("--rho0", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--b", type=_positive_int, help="poly: circle count per path")
    s.add_argument("--l", type=_positive_int, help="poly: path length")
    s.add_argument("--colorings", type=_positive_int, default=200)
    s.add_argument("--c-star", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--beta", type=float, help="poly: signal strength (defaults to the stored beta)")
    s.add_argument("--out", help="write the estimate as index,value CSV")

    b = sub.add_parser("bench", help="run an experiment grid and write CSV + SVG")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON experiment config")
    src.add_argument("--preset", help="built-in recipe: fig1a, fig1b, fig1c, fig2")
    b.add_argument("--trials", type=_positive_int)
    b.add_argument("--out-dir", default=".")
    b.add_argument("--threads", type=int, help="worker threads (default: SPCA_THREADS or all cores)")
    b.add_argument("--no-timing", action="store_true", help="record runtime_ms as 0 for byte-identical reruns")

    pl = sub.add_parser("plot", help="render an SVG from a bench CSV")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--x", required=True, help="swept column, e.g. beta or lambda")
    pl.add_argument("--out", required=True)
    pl.add_argument("--title", default="")

    m = sub.add_parser("moments", help="print a moment-matching distribution as CSV")
    m.add_argument("--lam", type=float, required=True)
    m.add_argument("--delta", type=float, required=True)
    m.add_argument("--s", type=_s_mode, default="auto")

    ld = sub.add_parser("lowdeg", help="low-degree chi-square diagnostics")
    ld.add_argument("--mode", choices=("bound", "exact", "mc"), required=True)
    ld.add_argument("--n", type=_positive_int, required=True)
    ld.add_argument("--d", type=_positive_int, required=True)
    ld.add_argument("--k", type=_positive_int, required=True)
    ld.add_argument("--beta", type=float, required=True)
    ld.add_argument("--D", type=_positive_int, default=4, help="degree bound")
    ld.add_argument("--alpha", action="append", default=[],
                    help="mc: multi-index as 'i,j:m;i,j:m' (0-based); repeatable")
    ld.add_argument("--samples", type=_positive_int, default=100000)
    ld.add_argument("--u-law", choices=("gaussian", "rademacher"), default="gaussian")
    ld.add_argument("--seed", type=int, default=0)
    return p


def _cmd_gen(a):
    rng = make_rng(a.seed)
    if a.form == "subspace":
        if a.lam is None or a.delta is None:
            raise InputError("subspace form needs --lam and --delta")
        inst = sample_subspace_instance(a.n, a.d, a.lam, a.delta, a.s, rng)
    else:
        if a.k is None or a.beta is None:
            raise InputError("wishart form needs --k and --beta")
        spec = {"none": None, "whitening": Whitening(), "dt": DtFool(a.b), "ct": CtFool(a.b, a.r)}[a.adversary]
        inst = sample_wishart_instance(ModelParams(a.n, a.d, a.k, a.beta, a.seed), spec, rng, a.signal_mode)
    save_instance(inst, a.out)
    print(json.dumps(describe(inst), sort_keys=True))
    return 0


def _parse_alpha(text):
    mapping = {}
    for part in filter(None, (t.strip() for t in text.split(";"))):
        try:
            ij, _, m = part.partition(":")
            i, j = (int(x) for x in ij.split(","))
            mapping[(i, j)] = int(m) if m else 1
        except ValueError:
            raise InputError(f"bad multi-index entry {part!r}; expected i,j:m") from None
    return MultiIndex(mapping)


def _cmd_solve(a):
    inst = load_instance(a.input)
    k = a.k or inst.params.k
    if a.algo == "sdp":
        est = sdp_estimate(inst.Y, k, SdpOptions(max_iter=a.max_iter, rho0=a.rho0, tol=a.tol))
    elif a.algo == "poly":
        beta = a.beta if a.beta is not None else inst.params.beta
        auto_b, auto_l = choose_poly_params(inst.n, inst.d, k, a.c_star)
        params = ColorCodingParams(a.b or auto_b, a.l or auto_l, a.colorings, a.c_star, a.seed)
        est = poly_estimator(inst.Y, k, beta, params)
    else:
        opts = EstimatorOptions(tau=a.tau, output_mode=a.output_mode, seed=a.seed)
        est = ALGORITHMS[a.algo](inst.Y, k, opts)
    summary = {"algo": est.algo, "k": k, "nnz": int(np.count_nonzero(est.v_hat))}
    if inst.truth is not None:
        summary["corr2"] = corr2(est.v_hat, inst.truth.v0)
    for key, val in est.diagnostics.items():
        if isinstance(val, (int, float, str, bool)):
            summary[key] = val
    if a.out:
        with open(a.out, "w") as fh:
            fh.write("index,value\n")
            for i, v in enumerate(est.v_hat):
                fh.write(f"{i},{float(v) + 0.0:.17g}\n")
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_bench(a):
    from dataclasses import replace

    from .bench import ExperimentConfig, PlotSpec, plot_svg, preset, run_experiment, series, write_csv

    if a.config:
        with open(a.config) as fh:
            config = ExperimentConfig.from_json(fh.read())
        if a.trials:
            config = replace(config, trials=a.trials)
    else:
        config = preset(a.preset, a.trials) if a.trials else preset(a.preset)
    if a.no_timing:
        config = replace(config, timing=False)
    os.makedirs(a.out_dir, exist_ok=True)
    records = run_experiment(config, threads=a.threads)
    csv_path = config.csv or os.path.join(a.out_dir, f"{config.name}.csv")
    write_csv(records, csv_path)
    print(f"wrote {len(records)} records to {csv_path}")
    x = config.x
    if x is not None:
        svg_path = config.svg or os.path.join(a.out_dir, f"{config.name}.svg")
        plot_svg(records, PlotSpec(x=x, title=config.name), svg_path)
        print(f"wrote {svg_path}")
        for algo, pts in series(records, x).items():
            means = " ".join(f"{p.mean:.3f}" for p in pts)
            print(f"  {algo:6s} {means}")
    failed = sum(1 for r in records if r.error)
    if failed:
        print(f"{failed} records carry an error tag", file=sys.stderr)
    return 0


def _cmd_plot(a):
    from .bench import PlotSpec, plot_svg, read_csv

    plot_svg(read_csv(a.csv), PlotSpec(x=a.x, title=a.title), a.out)
    print(f"wrote {a.out}")
    return 0


def _cmd_moments(a):
    dist = build_moment_distribution(a.lam, a.delta, a.s)
    print(f"# s={dist.s} lambda={a.lam:.15g} delta={a.delta:.15g} residual={dist.residual:.3e}")
    targets = " ".join(f"M{r}={t:.12g}" for r, t in sorted(dist.targets.items()))
    print(f"# targets {targets}")
    print("location,weight")
    for x, w in dist.atoms:
        print(f"{float(x):.17g},{float(w):.17g}")
    return 0


def _cmd_lowdeg(a):
    u_spec = GAUSSIAN if a.u_law == "gaussian" else UMomentSpec("rademacher")
    print("E_or_alpha,value")
    if a.mode == "bound":
        terms = chi2_bound_terms(a.n, a.d, a.k, a.beta, a.D)
        for E, val in terms:
            print(f"{E},{val:.17g}")
        print(f"total,{math.fsum(t for _, t in terms):.17g}")
    elif a.mode == "exact":
        val = chi2_multilinear_exact(a.n, a.d, a.k, a.beta, a.D, u_spec)
        print(f"total,{val:.17g}")
    else:
        if not a.alpha:
            raise InputError("mc mode needs at least one --alpha")
        rng = make_rng(a.seed)
        sampler = planted_sampler(a.n, a.d, a.k, a.beta, u_spec)
        for text in a.alpha:
            alpha = _parse_alpha(text)
            mean, err = mc_hermite_expectation(alpha, sampler, a.samples, rng)
            exact = hermite_expectation_planted(alpha, a.n, a.d, a.k, a.beta, u_spec)
            label = text.replace(",", " ")
            print(f"{label},{mean:.17g}")
            print(f"{label} stderr,{err:.17g}")
            print(f"{label} exact,{exact:.17g}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "plot": _cmd_plot,
    "moments": _cmd_moments,
    "lowdeg": _cmd_lowdeg,
}


def cli_main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (SpcaError, OSError) as exc:
        print(f"robust-spca {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
