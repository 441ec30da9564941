"""Robust sparse PCA: instance generators, estimators, adversaries and diagnostics."""

__version__ = "0.1.0"
