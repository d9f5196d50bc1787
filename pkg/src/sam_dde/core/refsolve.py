"""
Reference solver for constant-lag delay differential equations

Bogacki-Shampine 3(2) pair advanced by the method of steps. Lagged states come
from the cubic Hermite dense output built so far (or from the history on
[-max lag, 0]); the step is capped by the smallest lag so a lagged query never
falls inside the step being taken. Lag multiples and known jump times are forced
mesh points.
"""

import bisect
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..config import Config, get_config
from ..error_handling import MaxStepsExceeded, MissingHistory, NonFiniteState, StepSizeUnderflow
from ..models.problem import Array, AveragedProblem, HistoryFunction, OscillatoryProblem
from ..models.solution import DenseSolution, _hermite
from ..utils.logging import get_sam_logger

logger = get_sam_logger(__name__)


# Bogacki-Shampine tableau
EVAL_STAGES = (0.0, 1 / 2, 3 / 4, 1.0)
BT = {
    1: (1 / 2,),
    2: (0.0, 3 / 4),
    3: (2 / 9, 1 / 3, 4 / 9),
}
# b - b_hat for the local error estimate
TR = (-5 / 72, 1 / 12, 1 / 9, -1 / 8)
ORDER = 3


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 2_000_000
    initial_step: Optional[float] = None
    max_step: float = math.inf
    fixed_step: Optional[float] = None
    breakpoint_depth: int = 4
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("rel_tol and abs_tol must be > 0")
        if self.fixed_step is not None and self.fixed_step <= 0:
            raise ValueError("fixed_step must be > 0")

    @classmethod
    def from_config(cls, config: Optional[Config] = None, **overrides: float) -> "SolverConfig":
        s = (config or get_config()).solver
        base = cls(
            rel_tol=s.rel_tol,
            abs_tol=s.abs_tol,
            max_steps=s.max_steps,
            initial_step=s.initial_step,
            breakpoint_depth=s.breakpoint_depth,
            safety=s.safety,
            min_factor=s.min_factor,
            max_factor=s.max_factor,
        )
        return replace(base, **overrides) if overrides else base


class LagView:
    """Lazy access to x(t - lag_i); only the lags actually indexed are looked up."""

    __slots__ = ("_lookup", "_t", "_lags")

    def __init__(self, lookup: Callable[[float], Array], t: float, lags: Tuple[float, ...]):
        self._lookup = lookup
        self._t = t
        self._lags = lags

    def __getitem__(self, i: int) -> Array:
        return self._lookup(self._t - self._lags[i])

    def __len__(self) -> int:
        return len(self._lags)


@dataclass(frozen=True)
class LaggedRHS:
    """dx/dt = fun(t, x, lagged) with lagged[i] = x(t - lags[i])"""

    dim: int
    lags: Tuple[float, ...]
    fun: Callable[[float, Array, LagView], Array]
    jump_times: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.lags or any(lag <= 0 for lag in self.lags):
            raise ValueError(f"lags must be positive, got {self.lags}")
        if list(self.lags) != sorted(self.lags):
            raise ValueError(f"lags must be sorted, got {self.lags}")


def breakpoints(
    lags: Sequence[float], jump_times: Sequence[float], t0: float, t_end: float, depth: int
) -> List[float]:
    """Lag multiples, jump times propagated ``depth`` generations, and the span ends."""
    pts = {t0, t_end}
    for lag in lags:
        m = 1
        while m * lag < t_end:
            pts.add(t0 + m * lag)
            m += 1
    frontier = {t0, *jump_times}
    pts.update(t for t in jump_times if t0 < t < t_end)
    for _ in range(depth):
        frontier = {b + lag for b in frontier for lag in lags if b + lag < t_end}
        pts.update(frontier)

    merged: List[float] = []
    tol = 1e-12 * max(1.0, abs(t_end))
    for p in sorted(p for p in pts if t0 <= p <= t_end):
        if merged and p - merged[-1] <= tol:
            continue
        merged.append(p)
    if merged[-1] != t_end:
        merged[-1] = t_end
    return merged


class _DenseBuilder:
    """Growing Hermite interpolant used for lagged lookups during integration."""

    def __init__(self, history: HistoryFunction, t0: float, y0: Array):
        self.history = history
        self.t: List[float] = [t0]
        self.y: List[Array] = [y0]
        self.f_left: List[Array] = []
        self.f_right: List[Array] = []

    def append(self, t1: float, y1: Array, f0: Array, f1: Array) -> None:
        self.t.append(t1)
        self.y.append(y1)
        self.f_left.append(f0)
        self.f_right.append(f1)

    def __call__(self, s: float) -> Array:
        if s <= self.t[0]:
            if s < -self.history.tau - 1e-12 * max(1.0, self.history.tau):
                raise MissingHistory(t=s)
            return self.history(min(s, 0.0))
        if s > self.t[-1]:
            if s - self.t[-1] > 1e-9 * max(1.0, abs(s)):
                raise MissingHistory(t=s).annotate(t_current=self.t[-1])
            return self.y[-1]
        i = min(bisect.bisect_right(self.t, s) - 1, len(self.t) - 2)
        ts = np.array([s])
        return _hermite(
            ts,
            np.array([self.t[i]]),
            np.array([self.t[i + 1]]),
            self.y[i],
            self.y[i + 1],
            self.f_left[i],
            self.f_right[i],
        )[0]

    def freeze(self, bps: Sequence[float], stats: Tuple[int, int, int]) -> DenseSolution:
        return DenseSolution(
            history=self.history,
            mesh=np.asarray(self.t),
            states=np.stack(self.y),
            f_left=np.stack(self.f_left),
            f_right=np.stack(self.f_right),
            breakpoints=np.asarray(bps),
            n_accepted=stats[0],
            n_rejected=stats[1],
            n_evals=stats[2],
        )


def _initial_step(y: Array, f0: Array, cfg: SolverConfig, span: float) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * max(1.0, span)
    else:
        h0 = 0.01 * d0 / d1
    return min(h0, span)


def solve_dde(
    rhs: LaggedRHS,
    history: HistoryFunction,
    t_span: Tuple[float, float],
    config: Optional[SolverConfig] = None,
) -> DenseSolution:
    """Integrate ``rhs`` from the history over ``t_span`` = (0, t_end)."""
    cfg = config or SolverConfig.from_config()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if t0 != 0.0:
        raise ValueError("integration starts from the history at t = 0")
    if t_end <= t0:
        raise ValueError(f"empty span {t_span}")

    lags = tuple(rhs.lags)
    bps = breakpoints(lags, rhs.jump_times, t0, t_end, cfg.breakpoint_depth)
    y = history(t0)
    dense = _DenseBuilder(history, t0, y)
    n_evals = 0

    def f(t: float, x: Array) -> Array:
        nonlocal n_evals
        n_evals += 1
        return np.asarray(rhs.fun(t, x, LagView(dense, t, lags)), dtype=float)

    h_cap = min(cfg.max_step, lags[0])
    t = t0
    f_start = f(t, y)
    if cfg.fixed_step is not None:
        h_prop = min(cfg.fixed_step, h_cap)
    elif cfg.initial_step is not None:
        h_prop = min(cfg.initial_step, h_cap)
    else:
        h_prop = min(_initial_step(y, f_start, cfg, t_end - t0), h_cap)

    bp_index = 1
    n_accepted = n_rejected = 0
    err_prev = 1.0
    started = time.perf_counter()
    c2, c3 = EVAL_STAGES[1], EVAL_STAGES[2]
    a21 = BT[1][0]
    a32 = BT[2][1]
    b1, b2, b3 = BT[3]
    e1, e2, e3, e4 = TR

    while t < t_end:
        if n_accepted + n_rejected >= cfg.max_steps:
            raise MaxStepsExceeded(t, cfg.max_steps)

        h = min(h_prop, h_cap)
        next_bp = bps[bp_index]
        hits_bp = t + h >= next_bp - 1e-6 * h
        if hits_bp:
            h = next_bp - t
            t_new = next_bp
        else:
            t_new = t + h
        # stages on a breakpoint see the left limit of a piecewise rhs
        t_last = np.nextafter(t_new, -math.inf) if hits_bp else t_new

        k1 = f_start
        k2 = f(t + c2 * h, y + h * a21 * k1)
        k3 = f(t + c3 * h, y + h * a32 * k2)
        y_new = y + h * (b1 * k1 + b2 * k2 + b3 * k3)
        k4 = f(t_last, y_new)

        if cfg.fixed_step is not None:
            err_norm = 0.0
        else:
            err = h * (e1 * k1 + e2 * k2 + e3 * k3 + e4 * k4)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.max(np.abs(err) / scale))
            if not math.isfinite(err_norm):
                err_norm = math.inf

        if err_norm <= 1.0:
            if not np.all(np.isfinite(y_new)):
                raise NonFiniteState("reference solver", {"t": t_new})
            dense.append(t_new, y_new, k1, k4)
            n_accepted += 1
            if hits_bp:
                bp_index += 1
                f_start = f(t_new, y_new) if t_new < t_end else k4
            else:
                f_start = k4
            t, y = t_new, y_new
            if cfg.fixed_step is None:
                if err_norm == 0.0:
                    factor = cfg.max_factor
                else:
                    factor = cfg.safety * err_norm ** (-0.7 / ORDER) * err_prev ** (0.4 / ORDER)
                    factor = min(cfg.max_factor, max(cfg.min_factor, factor))
                err_prev = max(err_norm, 1e-4)
                h_new = h * factor
                h_prop = max(h_prop, h_new) if hits_bp and h < h_prop else h_new
        else:
            n_rejected += 1
            factor = cfg.min_factor
            if math.isfinite(err_norm):
                factor = max(cfg.min_factor, cfg.safety * err_norm ** (-1.0 / ORDER))
            h_prop = h * factor
            if h_prop < 1e-14 * max(1.0, abs(t)):
                raise StepSizeUnderflow(t, h_prop)

    elapsed = time.perf_counter() - started
    logger.debug(
        "solve_dde finished",
        accepted=n_accepted,
        rejected=n_rejected,
        evals=n_evals,
        wall_ms=round(elapsed * 1e3, 3),
    )
    return dense.freeze(bps, (n_accepted, n_rejected, n_evals))


def solve_oscillatory(
    problem: OscillatoryProblem,
    config: Optional[SolverConfig] = None,
    omega: Optional[float] = None,
    t_end: Optional[float] = None,
) -> DenseSolution:
    """Reference for the oscillatory problem with theta = Omega t; step capped at T / 8."""
    Omega = omega if omega is not None else problem.omega
    if Omega is None:
        raise ValueError("Omega is required for the oscillatory reference")
    cfg = config or SolverConfig.from_config()
    fraction = get_config().solver.oscillatory_step_fraction
    cfg = replace(cfg, max_step=min(cfg.max_step, 2.0 * math.pi / Omega / fraction))
    osc = problem.f

    def fun(t: float, x: Array, lagged: LagView) -> Array:
        return osc(x, lagged[0], t, Omega * t, Omega)

    rhs = LaggedRHS(dim=problem.dim, lags=(problem.delay,), fun=fun)
    started = time.perf_counter()
    sol = solve_dde(rhs, problem.history, (0.0, problem.t_max if t_end is None else t_end), cfg)
    logger.info(
        "oscillatory reference solved",
        problem=problem.name,
        Omega=Omega,
        steps=sol.n_accepted,
        evals=sol.n_evals,
        wall_ms=round((time.perf_counter() - started) * 1e3, 3),
    )
    return sol


def averaged_lagged_rhs(problem: AveragedProblem) -> LaggedRHS:
    """Lags (tau, 2 tau); Z = X(t - 2 tau) is only read once t >= tau."""
    tau = problem.delay

    def fun(t: float, x: Array, lagged: LagView) -> Array:
        if t < tau:
            return problem.rhs(t, x, lagged[0], None)
        return problem.rhs(t, x, lagged[0], lagged[1])

    return LaggedRHS(dim=problem.dim, lags=(tau, 2.0 * tau), fun=fun, jump_times=tuple(problem.jump_times))


def solve_averaged(
    problem: AveragedProblem, config: Optional[SolverConfig] = None, t_end: Optional[float] = None
) -> DenseSolution:
    started = time.perf_counter()
    sol = solve_dde(
        averaged_lagged_rhs(problem),
        problem.history,
        (0.0, problem.t_max if t_end is None else t_end),
        config,
    )
    logger.info(
        "averaged reference solved",
        problem=problem.name,
        Omega=problem.omega,
        steps=sol.n_accepted,
        wall_ms=round((time.perf_counter() - started) * 1e3, 3),
    )
    return sol


def self_convergence_order(
    rhs: LaggedRHS,
    history: HistoryFunction,
    t_span: Tuple[float, float],
    base_step: Optional[float] = None,
    exact: Optional[Callable[[float], Array]] = None,
) -> float:
    """Observed order from fixed-step runs with h, h/2, h/4 at t_span[1], not from tolerance levels.

    With ``exact`` the order is log2(e_h / e_{h/2}) averaged over both halvings;
    otherwise the Richardson ratio of successive differences is used.
    """
    t_end = float(t_span[1])
    h = base_step or (t_end - t_span[0]) / 20.0
    ends = []
    for step in (h, h / 2.0, h / 4.0):
        cfg = SolverConfig(fixed_step=step)
        ends.append(solve_dde(rhs, history, t_span, cfg).eval(t_end))

    if exact is not None:
        ref = np.asarray(exact(t_end), dtype=float)
        errs = [float(np.max(np.abs(e - ref))) for e in ends]
        return 0.5 * (math.log2(errs[0] / errs[1]) + math.log2(errs[1] / errs[2]))
    d1 = float(np.max(np.abs(ends[0] - ends[1])))
    d2 = float(np.max(np.abs(ends[1] - ends[2])))
    if d2 == 0.0:
        return math.inf if d1 > 0.0 else math.nan
    return math.log2(d1 / d2)
