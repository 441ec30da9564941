"""Run an experiment grid: one instance per (cell, trial), every algorithm on it."""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

from ..adversary import CtFool, DtFool, Whitening, build_moment_distribution
from ..core import corr2
from ..estimators import ALGORITHMS, EstimatorOptions
from ..model import SUBSPACE, ModelParams, sample_subspace_instance, sample_wishart_instance
from ..polyest import ColorCodingParams, poly_estimator
from ..rng import derive_seed, make_rng
from ..sdp import SdpOptions, sdp_estimate
from .records import BenchRecord


def thread_count():
    """Worker count from ``SPCA_THREADS`` (unset or 0 means every core)."""
    raw = os.environ.get("SPCA_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def run_algorithm(spec, Y, k, beta):
    opts = dict(spec.options)
    if spec.name == "sdp":
        return sdp_estimate(Y, k, SdpOptions(**opts))
    if spec.name == "poly":
        brute = opts.pop("brute_force", False)
        count = opts.pop("count", "paper")
        params = ColorCodingParams(**opts) if opts else None
        return poly_estimator(Y, k, beta, params, brute_force=brute, count=count)
    return ALGORITHMS[spec.name](Y, k, EstimatorOptions(**opts))


def _adversary(config, cell):
    adv = config.adversary
    n, d, k, beta = cell["n"], cell["d"], cell["k"], cell["beta"]
    if adv.type == "none":
        return None, math.nan, 0
    if adv.type == "whitening":
        return Whitening(), math.nan, 0
    b = adv.strength(n, d, k, beta)
    if adv.type == "dt":
        return DtFool(b), b, 0
    r = adv.blocks(n, d)
    return CtFool(b, r), b, r


def _build(config, cell, seed, dist_cache):
    rng = make_rng(seed)
    if config.form == SUBSPACE:
        key = (cell["lambda"], cell["delta"], cell["s"])
        if key not in dist_cache:
            dist_cache[key] = build_moment_distribution(*key)
        return sample_subspace_instance(cell["n"], cell["d"], cell["lambda"], cell["delta"], cell["s"], rng, dist=dist_cache[key])
    spec, _, _ = _adversary(config, cell)
    params = ModelParams(cell["n"], cell["d"], cell["k"], cell["beta"], seed)
    return sample_wishart_instance(params, spec, rng, config.signal_mode)


def _cell_fields(config, cell):
    if config.form == SUBSPACE:
        return {"k": 0, "beta": math.nan, "lam": float(cell["lambda"]), "delta": float(cell["delta"]),
                "s": int(cell["s"]) if cell["s"] != "auto" else -1, "adversary": "moment", "adv_b": math.nan, "adv_r": 0}
    _, b, r = _adversary(config, cell)
    return {"k": cell["k"], "beta": float(cell["beta"]), "lam": math.nan, "delta": math.nan, "s": 0,
            "adversary": config.adversary.type, "adv_b": b, "adv_r": r}


def _run_task(config, index, cell, trial, dist_cache):
    seed = derive_seed(config.seed, index, trial)
    base = _cell_fields(config, cell)
    out = []
    try:
        inst = _build(config, cell, seed, dist_cache)
    except Exception as exc:  # noqa: BLE001 - recorded and the run continues
        tag = f"{type(exc).__name__}: {exc}"
        for a_idx, spec in enumerate(config.algorithms):
            out.append(((index, a_idx, trial), _record(config, cell, base, spec.name, trial, seed, math.nan, math.nan, tag)))
        return out
    if config.form == SUBSPACE:
        base["k"] = inst.k
        base["s"] = inst.s
        base["beta"] = inst.params.beta
    for a_idx, spec in enumerate(config.algorithms):
        t0 = time.perf_counter()
        try:
            est = run_algorithm(spec, inst.Y, inst.k, inst.params.beta)
            score, err = corr2(est.v_hat, inst.truth.v0), ""
        except Exception as exc:  # noqa: BLE001
            score, err = math.nan, f"{type(exc).__name__}: {exc}"
        ms = 1e3 * (time.perf_counter() - t0) if config.timing else 0.0
        out.append(((index, a_idx, trial), _record(config, cell, base, spec.name, trial, seed, score, ms, err)))
    return out


def _record(config, cell, base, algo, trial, seed, score, ms, err):
    return BenchRecord(
        algo, config.form, cell["n"], cell["d"], base["k"], base["beta"], base["lam"], base["delta"], base["s"],
        base["adversary"], base["adv_b"], base["adv_r"], trial, seed, score, ms, err,
    )


def run_experiment(config, threads=None, progress=None):
    """One record per (cell, algorithm, trial), sorted by that key.

    Failures become records with ``corr2 = nan`` and an error tag.  The
    output is independent of ``threads`` and scheduling order.
    """
    threads = thread_count() if threads is None else max(1, int(threads))
    cells = config.cells()
    tasks = [(i, cell, t) for i, cell in enumerate(cells) for t in range(config.trials)]
    dist_cache = {}
    if config.form == SUBSPACE:
        for cell in cells:
            key = (cell["lambda"], cell["delta"], cell["s"])
            try:
                dist_cache[key] = build_moment_distribution(*key)
            except Exception:  # noqa: BLE001 - surfaces per trial
                pass
    results = []
    if threads == 1:
        for j, (i, cell, t) in enumerate(tasks):
            results.extend(_run_task(config, i, cell, t, dist_cache))
            if progress:
                progress(j + 1, len(tasks))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_task, config, i, cell, t, dist_cache) for i, cell, t in tasks]
            for j, f in enumerate(futures):
                results.extend(f.result())
                if progress:
                    progress(j + 1, len(tasks))
    results.sort(key=lambda kr: kr[0])
    return [r for _, r in results]
