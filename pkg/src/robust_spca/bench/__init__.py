"""Experiment harness: configuration, sweeps, CSV records and SVG plots."""

from .config import AdversaryConfig, AlgoSpec, ExperimentConfig
from .plot import PlotSpec, plot_svg, render_svg, series
from .presets import PRESETS, preset
from .records import COLUMNS, BenchRecord, read_csv, write_csv
from .runner import run_experiment, thread_count

__all__ = [
    "AdversaryConfig",
    "AlgoSpec",
    "BenchRecord",
    "COLUMNS",
    "ExperimentConfig",
    "PRESETS",
    "PlotSpec",
    "plot_svg",
    "preset",
    "read_csv",
    "render_svg",
    "run_experiment",
    "series",
    "thread_count",
    "write_csv",
]
