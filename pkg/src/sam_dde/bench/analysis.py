"""
Order diagnostics, complexity and timing studies
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_config
from ..core.refsolve import SolverConfig, solve_oscillatory
from ..core.sam import SamOptions, expected_rhs_evals, history_supplier, micro_forward, sam_solve
from ..error_handling import InsufficientDiagonal
from ..models.grid import GridParams, make_grid
from ..models.problem import OscillatoryProblem
from ..problems.registry import get_problem
from ..utils.logging import get_sam_logger
from ..utils.metrics import MetricsCollector
from .sweep import CellResult, ErrorTable

logger = get_sam_logger(__name__)

# Errors below this are rounding noise; their ratios are meaningless
SATURATION_FLOOR = 1e-13


def _ratios(cells: Sequence[CellResult]) -> List[float]:
    populated = [c.error for c in cells if not c.excluded and c.error is not None]
    out = []
    for a, b in zip(populated, populated[1:]):
        if a < SATURATION_FLOOR or b < SATURATION_FLOOR:
            out.append(math.nan)
        else:
            out.append(a / b)
    return out


def diagonal_ratios(table: ErrorTable) -> List[float]:
    """e_i / e_{i+1} along the main diagonal; NaN marks saturated pairs."""
    cells = [c for c in table.diagonal() if not c.excluded and c.error is not None]
    if len(cells) < 3:
        raise InsufficientDiagonal(len(cells))
    return _ratios(cells)


def column_ratios(table: ErrorTable, Omega: Optional[float] = None) -> List[float]:
    """Ratios down one column (default: the largest Omega)."""
    Omega = table.Omega_list[-1] if Omega is None else Omega
    return _ratios(table.column(Omega))


def row_spread(table: ErrorTable, last: int = 3) -> List[float]:
    """(max - min) / max over the last ``last`` columns of each row; NaN if one is excluded."""
    out = []
    for n in table.N_list:
        cells = [table.cell(n, w) for w in table.Omega_list[-last:]]
        errors = [c.error for c in cells if c.error is not None]
        if not errors or len(errors) < len(cells) or max(errors) < SATURATION_FLOOR:
            out.append(math.nan)
        else:
            out.append((max(errors) - min(errors)) / max(errors))
    return out


@dataclass(frozen=True)
class ComplexityReport:
    equal: bool
    counts: Dict[float, int]
    expected: Dict[float, int]


NuMaxRule = Union[int, Callable[[float], int]]


def complexity_probe(
    problem: OscillatoryProblem,
    N: int,
    nu_max: NuMaxRule,
    Omega_pair: Tuple[float, float],
    t_max: Optional[float] = None,
) -> ComplexityReport:
    """Run SAM at two frequencies and compare the oscillatory rhs evaluation counts."""
    t_max = problem.t_max if t_max is None else t_max
    counts: Dict[float, int] = {}
    expected: Dict[float, int] = {}
    for Omega in Omega_pair:
        nu = nu_max(Omega) if callable(nu_max) else nu_max
        grid = make_grid(N, nu, Omega, problem.delay)
        counts[Omega] = sam_solve(problem, grid, SamOptions(), t_max=t_max).eval_count
        expected[Omega] = expected_rhs_evals(N, nu, t_max, problem.delay)
    a, b = (counts[w] for w in Omega_pair)
    logger.info("complexity probe", N=N, counts=counts)
    return ComplexityReport(equal=a == b, counts=counts, expected=expected)


@dataclass(frozen=True)
class TimingReport:
    Omega: float
    N: int
    sam_seconds: float
    reference_seconds: float
    speedup: float
    samples: Dict[str, List[float]] = field(default_factory=dict)


def timing_compare(
    problem: str,
    Omega: float,
    N: int,
    tol: float = 1e-8,
    repeats: Optional[int] = None,
    c: Optional[int] = None,
) -> TimingReport:
    """Median wall time of the oscillatory reference over that of SAM on [0, t_max]."""
    repeats = repeats or get_config().bench.timing_repeats
    bundle = get_problem(problem, Omega)
    osc = bundle.oscillatory
    grid = make_grid(N, (c or bundle.default_c) * N, Omega, osc.delay)
    solver = SolverConfig.from_config(rel_tol=tol)
    collector = MetricsCollector()

    for _ in range(repeats):
        done = collector.timer("sam")
        sam_solve(osc, grid, SamOptions())
        done()
        done = collector.timer("reference")
        solve_oscillatory(osc, solver, omega=Omega)
        done()

    sam_s = float(np.median(collector.get_samples("sam")))
    ref_s = float(np.median(collector.get_samples("reference")))
    speedup = ref_s / sam_s if sam_s > 0 else math.inf
    logger.info("timing", problem=problem, Omega=Omega, N=N, sam_s=sam_s, reference_s=ref_s, speedup=speedup)
    return TimingReport(
        Omega=Omega,
        N=N,
        sam_seconds=sam_s,
        reference_seconds=ref_s,
        speedup=speedup,
        samples={k: collector.get_samples(k) for k in ("sam", "reference")},
    )


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class SuperconvergenceReport:
    Omegas: Tuple[float, ...]
    errors: Tuple[float, ...]
    nu_max: int
    slope: float


def euler_period_error(problem: OscillatoryProblem, Omega: float, nu_max: int) -> float:
    """|Euler(T) - x(T)| for one micro period started at t = 0 from phi(0)."""
    grid = GridParams(N=1, nu_max=nu_max, Omega=Omega, tau=problem.delay)
    past = history_supplier(0, {}, problem, grid)
    traj = micro_forward(problem, grid, 0, problem.history(0.0), past)
    solver = SolverConfig.from_config(rel_tol=1e-12, abs_tol=1e-14)
    ref = solve_oscillatory(problem, solver, omega=Omega, t_end=grid.T)
    return float(np.max(np.abs(traj.forward_end - ref.eval(grid.T))))


def euler_superconvergence(
    problem: OscillatoryProblem, Omega_list: Sequence[float], nu_max: int
) -> SuperconvergenceReport:
    """End-of-period Euler errors over Omega with their log-log slope (about -2)."""
    errors = tuple(euler_period_error(problem, w, nu_max) for w in Omega_list)
    slope = loglog_slope(Omega_list, errors)
    logger.info("euler superconvergence", nu_max=nu_max, slope=slope)
    return SuperconvergenceReport(Omegas=tuple(Omega_list), errors=errors, nu_max=nu_max, slope=slope)
