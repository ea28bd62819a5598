from .config import (
    BaselineSpec,
    ConfigError,
    EloSpec,
    ExperimentConfig,
    LlmSpec,
    MethodSpec,
    ProblemSpec,
    ValidationSpec,
    config_from_dict,
    load_config,
)
from .runner import Cell, ResultsStore, cell_seed, cells_of, config_checksum, run_cell, run_experiment
from .validation import validate

__all__ = [
    "BaselineSpec", "ConfigError", "EloSpec", "ExperimentConfig", "LlmSpec", "MethodSpec", "ProblemSpec",
    "ValidationSpec", "config_from_dict", "load_config", "Cell", "ResultsStore", "cell_seed", "cells_of",
    "config_checksum", "run_cell", "run_experiment", "validate",
]
