"""Experiment orchestration: configuration, replicas, outputs and the CLI."""
from .cli import main
from .config import ConfigError, ExperimentConfig, replica_rng, replica_seed
from .experiments import run_experiment
from .output import emit_plot, write_csv, write_json

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "emit_plot",
    "main",
    "replica_rng",
    "replica_seed",
    "run_experiment",
    "write_csv",
    "write_json",
]
