"""Experiment harness: evaluation, figure data, synthetic corpora, CLI."""

from .experiment import ExperimentConfig, run_experiment
from .figures import HeatmapParams, read_pgm, render_heatmap, scatter_data, write_pgm
from .metrics import EvalReport, evaluate
from .synthetic import SyntheticSpec, generate_synthetic

__all__ = [
    "EvalReport",
    "ExperimentConfig",
    "HeatmapParams",
    "SyntheticSpec",
    "evaluate",
    "generate_synthetic",
    "read_pgm",
    "render_heatmap",
    "run_experiment",
    "scatter_data",
    "write_pgm",
]
