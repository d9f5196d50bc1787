"""
Stroboscopic averaging integrator

Macro steps of length H = tau/N advance the averaged state with Adams-Bashforth 2
(Euler at n = 0 and n = N, where the averaged slope jumps). The slope F_n is the
finite difference of an Euler micro-integration of the oscillatory problem over
one period, forward and backward from X_n, each started at phase 0.
"""

import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..error_handling import MissingHistory, NonFiniteState, SamError
from ..models.grid import GridParams
from ..models.problem import Array, OscillatoryProblem
from ..models.solution import MicroTrajectory, SamSolution, SlopeKind, SlopeRecord
from ..utils.logging import get_sam_logger

logger = get_sam_logger(__name__)


@dataclass(frozen=True)
class SamOptions:
    """Integrator switches.

    forward_only: forward differences at every n, no backward legs.
    retain_micro: keep every micro trajectory instead of the last N.
    """

    forward_only: bool = False
    retain_micro: bool = False


class _CountingRHS:
    def __init__(self, problem: OscillatoryProblem):
        self._f = problem.rhs
        self.count = 0

    def __call__(self, x: Array, y: Array, t: float, theta: float, Omega: float) -> Array:
        self.count += 1
        return np.asarray(self._f(x, y, t, theta, Omega), dtype=float)


def _check_finite(u: Array, n: int, nu: int) -> None:
    if not np.all(np.isfinite(u)):
        bad = int(np.argmax(~np.isfinite(u)))
        raise NonFiniteState("micro integration", {"n": n, "nu": nu, "component": bad})


def micro_forward(
    problem: OscillatoryProblem,
    grid: GridParams,
    n: int,
    X_n: Array,
    past: Array,
    traj: Optional[MicroTrajectory] = None,
    rhs=None,
) -> MicroTrajectory:
    """Euler from u_{n,0} = X_n over nu = 0..nu_max-1 with phase Omega nu h.

    ``past`` has rows nu + nu_max holding v_{n,nu}; only nu in [0, nu_max-1] are read.
    """
    f = rhs or problem.f
    nu_max, h, omega = grid.nu_max, grid.h, grid.Omega
    t_n = grid.step_time(n)
    if traj is None:
        traj = MicroTrajectory.empty(n, t_n, nu_max, problem.dim)
    u = traj.values
    u[nu_max] = X_n
    for nu in range(nu_max):
        row = nu_max + nu
        u[row + 1] = u[row] + h * f(u[row], past[row], t_n + nu * h, omega * nu * h, omega)
        _check_finite(u[row + 1], n, nu + 1)
    return traj


def micro_backward(
    problem: OscillatoryProblem,
    grid: GridParams,
    n: int,
    X_n: Array,
    past: Array,
    traj: Optional[MicroTrajectory] = None,
    rhs=None,
) -> MicroTrajectory:
    """Euler backwards from X_n over one period; reads v_{n,nu}, nu in [-nu_max+1, 0]."""
    f = rhs or problem.f
    nu_max, h, omega = grid.nu_max, grid.h, grid.Omega
    t_n = grid.step_time(n)
    if traj is None:
        traj = MicroTrajectory.empty(n, t_n, nu_max, problem.dim)
    u = traj.values
    u[nu_max] = X_n
    for nu in range(nu_max):
        row = nu_max - nu
        u[row - 1] = u[row] - h * f(u[row], past[row], t_n - nu * h, -omega * nu * h, omega)
        _check_finite(u[row - 1], n, -nu - 1)
    return traj


def history_supplier(
    n: int, store: Dict[int, MicroTrajectory], problem: OscillatoryProblem, grid: GridParams
) -> Array:
    """Past values v_{n,nu} as rows nu + nu_max.

    n < N reads phi(-tau + n H + nu h) (only nu >= 0 at n = 0). For n >= N the
    values are the micro trajectory of macro step n - N; at n = N its backward half
    must already hold phi(nu h).
    """
    nu_max, h = grid.nu_max, grid.h
    if n < grid.N:
        start = -nu_max if n > 0 else 0
        past = np.full((2 * nu_max + 1, problem.dim), np.nan)
        base = -problem.delay + grid.step_time(n)
        for nu in range(start, nu_max + 1):
            past[nu + nu_max] = problem.history(base + nu * h)
        return past
    source = store.get(n - grid.N)
    if source is None:
        raise MissingHistory(n, n - grid.N)
    return source.values


def _fill_initial_backward(traj: MicroTrajectory, problem: OscillatoryProblem, grid: GridParams) -> None:
    """u_{0,-nu} = phi(-nu h), needed as past values of macro step N."""
    for nu in range(1, grid.nu_max + 1):
        traj.values[grid.nu_max - nu] = problem.history(-nu * grid.h)


def slope_central(traj: MicroTrajectory, T: float) -> Array:
    return (traj.forward_end - traj.backward_end) / (2.0 * T)


def slope_forward(traj: MicroTrajectory, T: float) -> Array:
    return (traj.forward_end - traj.seed) / T


def expected_rhs_evals(N: int, nu_max: int, t_max: float, tau: float, forward_only: bool = False) -> int:
    """nu_max for n = 0 plus 2 nu_max for each n in [1, M] (nu_max without backward legs)."""
    M = int(math.floor(t_max * N / tau + 1e-9))
    if forward_only:
        return nu_max * (M + 1)
    return nu_max + 2 * nu_max * M


def stroboscopic_phase_mismatch(grid: GridParams, tau: Optional[float] = None) -> float:
    """Omega tau mod 2 pi, folded to [0, pi]; zero when the delay is a whole number of periods."""
    tau = grid.tau if tau is None else tau
    r = math.fmod(grid.Omega * tau, 2.0 * math.pi)
    return min(r, 2.0 * math.pi - r)


def sam_solve(
    problem: OscillatoryProblem,
    grid: GridParams,
    options: Optional[SamOptions] = None,
    t_max: Optional[float] = None,
) -> SamSolution:
    """Integrate the averaged solution on the step points 0, H, ..., M H <= t_max."""
    if options is None:
        from ..config import get_config

        options = SamOptions(retain_micro=get_config().grid.retain_micro)
    t_max = problem.t_max if t_max is None else t_max
    if abs(grid.tau - problem.delay) > 1e-12 * problem.delay:
        raise ValueError(f"grid tau={grid.tau} does not match problem delay={problem.delay}")

    N, H, T = grid.N, grid.H, grid.T
    M = grid.last_index(t_max)
    rhs = _CountingRHS(problem)
    started = time.perf_counter()

    states = np.empty((M + 1, problem.dim))
    states[0] = problem.history(0.0)
    store: Dict[int, MicroTrajectory] = {}
    slopes: List[SlopeRecord] = []

    logger.debug("sam_solve start", N=N, nu_max=grid.nu_max, Omega=grid.Omega, M=M)
    try:
        for n in range(M + 1):
            if n == N:
                _fill_initial_backward(store[0], problem, grid)
            past = history_supplier(n, store, problem, grid)
            X_n = states[n]
            traj = micro_forward(problem, grid, n, X_n, past, rhs=rhs)
            use_forward = options.forward_only or n == 0 or n == N
            if n >= 1 and not options.forward_only:
                micro_backward(problem, grid, n, X_n, past, traj=traj, rhs=rhs)
            if use_forward:
                F = slope_forward(traj, T)
                kind = SlopeKind.FORWARD
            else:
                F = slope_central(traj, T)
                kind = SlopeKind.CENTRAL
            slopes.append(SlopeRecord(n, F, kind))
            store[n] = traj
            if not options.retain_micro and n - N >= 0:
                del store[n - N]

            if n < M:
                if n == 0 or n == N:
                    states[n + 1] = X_n + H * F
                else:
                    states[n + 1] = X_n + 1.5 * H * F - 0.5 * H * slopes[n - 1].value
                if not np.all(np.isfinite(states[n + 1])):
                    raise NonFiniteState("macro step", {"n": n + 1})
    except SamError as e:
        e.annotate(N=N, Omega=grid.Omega, nu_max=grid.nu_max)
        logger.error(f"sam_solve failed at macro step: {e}", error_code=e.code, **e.details.context)
        raise

    elapsed = time.perf_counter() - started
    times = np.array([grid.step_time(n) for n in range(M + 1)])
    logger.info(
        "sam_solve finished",
        N=N,
        nu_max=grid.nu_max,
        Omega=grid.Omega,
        evals=rhs.count,
        wall_ms=round(elapsed * 1e3, 3),
    )
    return SamSolution(
        grid=grid,
        times=times,
        states=states,
        slopes=slopes,
        micro_store=store,
        eval_count=rhs.count,
        wall_time=elapsed,
        forward_only=options.forward_only,
    )


def count_rhs_evals(solution: SamSolution) -> int:
    return solution.eval_count
