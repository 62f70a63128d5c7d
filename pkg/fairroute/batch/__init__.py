"""Experiment matrices for FairRoute"""

from .runner import (
    DEFAULT_PROVIDER_COUNTS,
    Cell,
    CellOutcome,
    ExperimentRunner,
    ExperimentSpec,
    failure_messages,
    run_cell,
    with_seed,
)

__all__ = [
    "DEFAULT_PROVIDER_COUNTS",
    "Cell",
    "CellOutcome",
    "ExperimentRunner",
    "ExperimentSpec",
    "failure_messages",
    "run_cell",
    "with_seed",
]
