"""
Benchmark problems: delayed toggle switch (two forcing regimes) and a scalar test equation
"""

from .gene import GenePair, averaged_hill, gene_averaged, gene_oscillatory, geneproblem_pair
from .newpro import ScalarParams, newpro_averaged, newpro_fourier, newpro_oscillatory, newpro_problem
from .registry import ProblemBundle, get_problem, problem_names
from .toggle import ToggleParams, hill, hill_slope, toggle_averaged, toggle_fourier, toggle_oscillatory

__all__ = [
    "GenePair",
    "ProblemBundle",
    "ScalarParams",
    "ToggleParams",
    "averaged_hill",
    "gene_averaged",
    "gene_oscillatory",
    "geneproblem_pair",
    "get_problem",
    "hill",
    "hill_slope",
    "newpro_averaged",
    "newpro_fourier",
    "newpro_oscillatory",
    "newpro_problem",
    "problem_names",
    "toggle_averaged",
    "toggle_fourier",
    "toggle_oscillatory",
]
