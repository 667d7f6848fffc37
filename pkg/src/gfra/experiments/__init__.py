"""Configuration, experiment drivers, result files and the command line."""

from .config import ConfigError, ExperimentConfig
from .modelio import ModelFormatError, check_model_matches, load_model, save_model
from .report import RATE_GRID_DB, RateReport, ccdf, ergodic, likely95
from .runners import (ConfusionResult, make_dataset, run_asymptotic_check, run_confusion,
                      run_rate_experiment, train_model)

__all__ = [
    "ConfigError", "ExperimentConfig", "ModelFormatError", "check_model_matches", "load_model",
    "save_model", "RATE_GRID_DB", "RateReport", "ccdf", "ergodic", "likely95", "ConfusionResult",
    "make_dataset", "run_asymptotic_check", "run_confusion", "run_rate_experiment", "train_model",
]
