"""Configuration, experiments, reports and the command line."""

from .config import ExperimentConfig, Thresholds, build_config, read_config_file
from .experiments import (
    ExperimentRefused,
    ExperimentReport,
    rate_factor,
    run_check_conditions,
    run_experiment,
    run_limit_comparison,
    run_multiplier_experiment,
    run_rate_experiment,
    run_sample,
)
from .report import emit_report

__all__ = [
    "ExperimentConfig",
    "ExperimentRefused",
    "ExperimentReport",
    "Thresholds",
    "build_config",
    "emit_report",
    "rate_factor",
    "read_config_file",
    "run_check_conditions",
    "run_experiment",
    "run_limit_comparison",
    "run_multiplier_experiment",
    "run_rate_experiment",
    "run_sample",
]
