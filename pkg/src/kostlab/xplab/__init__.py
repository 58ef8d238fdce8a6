"""Experiment runner: configs, seeded trials, fits and reports."""
from .config import ExperimentConfig, load_config, parse_config
from .fit import ScalingFit, fit_power_law, scaling_fit
from .report import CSV_HEADER, emit_report
from .runner import TrialRecord, run_experiment

__all__ = ["ExperimentConfig", "parse_config", "load_config", "ScalingFit", "fit_power_law",
           "scaling_fit", "CSV_HEADER", "emit_report", "TrialRecord", "run_experiment"]
