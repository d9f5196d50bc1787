"""
sam-dde: stroboscopic averaging for delay differential equations with fast periodic forcing
"""

__version__ = "0.1.0"

from .core.sam import SamOptions, sam_solve
from .models.grid import GridParams, make_grid
from .problems.registry import get_problem

__all__ = ["GridParams", "SamOptions", "__version__", "get_problem", "make_grid", "sam_solve"]
