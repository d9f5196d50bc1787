"""
Integrators and averaging: SAM, the reference DDE solver and the Fourier-form averaged system
"""

from .averaging import (
    FourierProblem,
    averaged_rhs_phase1,
    averaged_rhs_phase2,
    check_h1,
    check_h2,
    commutator,
    f0,
    slope_oracle,
)
from .refsolve import LaggedRHS, SolverConfig, solve_averaged, solve_dde, solve_oscillatory
from .sam import (
    SamOptions,
    count_rhs_evals,
    history_supplier,
    micro_backward,
    micro_forward,
    sam_solve,
    slope_central,
    slope_forward,
)

__all__ = [
    "FourierProblem",
    "LaggedRHS",
    "SamOptions",
    "SolverConfig",
    "averaged_rhs_phase1",
    "averaged_rhs_phase2",
    "check_h1",
    "check_h2",
    "commutator",
    "count_rhs_evals",
    "f0",
    "history_supplier",
    "micro_backward",
    "micro_forward",
    "sam_solve",
    "slope_central",
    "slope_forward",
    "slope_oracle",
    "solve_averaged",
    "solve_dde",
    "solve_oscillatory",
]
