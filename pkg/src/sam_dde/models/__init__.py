"""
Data models
"""

from .grid import GridParams, is_feasible, make_grid
from .problem import AveragedProblem, HistoryFunction, OscillatoryProblem, history_value
from .solution import (
    DenseSolution,
    MicroTrajectory,
    SamSolution,
    SlopeKind,
    SlopeRecord,
    max_step_point_error,
)

__all__ = [
    "AveragedProblem",
    "DenseSolution",
    "GridParams",
    "HistoryFunction",
    "MicroTrajectory",
    "OscillatoryProblem",
    "SamSolution",
    "SlopeKind",
    "SlopeRecord",
    "history_value",
    "is_feasible",
    "make_grid",
    "max_step_point_error",
]
