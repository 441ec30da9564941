"""Desk-scale recipes for the four experimental figures.

fig1a: clean spiked model with k above sqrt(d); signal swept in units of the
       spectral threshold sqrt(d/n).  SVD with thresholding works.
fig1b: planted subspace whose off-support columns match two Gaussian
       moments; SVD-4 works while SVD-2 does not.
fig1c: the same with four matched moments; only SVD-6 works.
fig2:  clean spiked model with k below sqrt(d); signal swept in units of
       (k/sqrt(n)) sqrt(ln(d/k)).  Diagonal thresholding works.
"""

from ..errors import InputError
from .config import AlgoSpec, ExperimentConfig

DEFAULT_TRIALS = 20


def _algos(*names):
    return tuple(AlgoSpec(n) for n in names)


def fig1a(trials=DEFAULT_TRIALS, seed=11):
    return ExperimentConfig(
        name="fig1a",
        form="wishart",
        grid={"n": [200], "d": [1000], "k": [40], "beta": [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0]},
        beta_rule="bbp",
        algorithms=_algos("dt", "svd", "svd4", "svd6"),
        trials=trials,
        seed=seed,
        x="beta",
        working=("svd",),
    )


def fig1b(trials=DEFAULT_TRIALS, seed=12):
    return ExperimentConfig(
        name="fig1b",
        form="subspace",
        grid={"n": [15], "d": [10000], "lambda": [2.0, 3.0, 3.5, 4.0, 5.0, 6.0], "delta": [0.01], "s": [2]},
        algorithms=_algos("dt", "svd2", "svd4"),
        trials=trials,
        seed=seed,
        x="lambda",
        working=("svd4",),
    )


def fig1c(trials=DEFAULT_TRIALS, seed=13):
    return ExperimentConfig(
        name="fig1c",
        form="subspace",
        grid={"n": [15], "d": [10000], "lambda": [3.0, 3.2, 3.4, 3.6, 3.8], "delta": [0.01], "s": [4]},
        algorithms=_algos("dt", "svd2", "svd4", "svd6"),
        trials=trials,
        seed=seed,
        x="lambda",
        working=("svd6",),
    )


def fig2(trials=DEFAULT_TRIALS, seed=14):
    return ExperimentConfig(
        name="fig2",
        form="wishart",
        grid={"n": [200], "d": [2000], "k": [20], "beta": [0.25, 0.5, 0.75, 1.0, 1.5, 2.0]},
        beta_rule="dt_log_dk",
        algorithms=_algos("dt", "svd", "svd6"),
        trials=trials,
        seed=seed,
        x="beta",
        working=("dt",),
    )


PRESETS = {"fig1a": fig1a, "fig1b": fig1b, "fig1c": fig1c, "fig2": fig2}


def preset(name, trials=DEFAULT_TRIALS):
    try:
        return PRESETS[name](trials)
    except KeyError:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
