"""Experiment front end: CSV emission, convergence studies, registry, CLI."""

from .csvio import emit_csv, parse_csv
from .convergence import convergence_table, observed_order
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .cli import main

__all__ = [
    "emit_csv",
    "parse_csv",
    "convergence_table",
    "observed_order",
    "EXPERIMENTS",
    "ExperimentConfig",
    "run_experiment",
    "main",
]
