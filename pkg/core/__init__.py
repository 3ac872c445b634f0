"""
Core utilities for beam-sbp experiments.

Framework code shared by every experiment kind; the beam-specific numerics and
runners live in src/.
"""

from .base_experiment import BaseExperiment, RunConfig
from .output_writer import OutputWriter
from .schemas import CSV_COLUMNS, Check, ExperimentCell, ExperimentResult, ResultRow

__all__ = [
    "BaseExperiment",
    "RunConfig",
    "OutputWriter",
    "CSV_COLUMNS",
    "Check",
    "ExperimentCell",
    "ExperimentResult",
    "ResultRow",
]
