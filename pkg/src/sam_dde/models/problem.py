"""
Problem model definitions
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..error_handling import OutOfDomain

Array = np.ndarray

# (x, y, t, theta, Omega) -> dx/dt
OscillatoryRHS = Callable[[Array, Array, float, float, float], Array]
# (X, Y, dphi(t - tau), t, Omega) -> dX/dt for 0 <= t < tau
PhaseOneRHS = Callable[[Array, Array, Array, float, float], Array]
# (X, Y, Z, t, Omega) -> dX/dt for t >= tau
PhaseTwoRHS = Callable[[Array, Array, Array, float, float], Array]

# Relative slack on the history interval ends for rounded query times
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class HistoryFunction:
    """Initial function phi on [-tau, 0] with an optional analytic derivative"""

    value_fn: Callable[[float], Array]
    tau: float
    deriv_fn: Optional[Callable[[float], Array]] = None
    fd_delta: float = 1e-6

    @classmethod
    def constant(cls, value: Sequence[float], tau: float) -> "HistoryFunction":
        """History that is constant in time (derivative identically zero)."""
        v = np.atleast_1d(np.asarray(value, dtype=float)).copy()
        v.setflags(write=False)
        zero = np.zeros_like(v)
        zero.setflags(write=False)
        return cls(value_fn=lambda _t: v, tau=tau, deriv_fn=lambda _t: zero)

    def _check(self, t: float) -> float:
        slack = _DOMAIN_SLACK * max(1.0, self.tau)
        if t < -self.tau - slack or t > slack:
            raise OutOfDomain(t, -self.tau, 0.0)
        return min(max(t, -self.tau), 0.0)

    def __call__(self, t: float) -> Array:
        return np.array(self.value_fn(self._check(float(t))), dtype=float, ndmin=1)

    def values(self, ts: Sequence[float]) -> Array:
        """Evaluate on several times; shape (len(ts), D)."""
        return np.stack([self(t) for t in ts])

    def derivative(self, t: float) -> Array:
        """dphi/dt, falling back to differences with delta = fd_delta * max(1, |t|)."""
        t = self._check(float(t))
        if self.deriv_fn is not None:
            return np.array(self.deriv_fn(t), dtype=float, ndmin=1)
        delta = self.fd_delta * max(1.0, abs(t))
        lo, hi = t - delta, t + delta
        if lo < -self.tau:
            return (self(t + delta) - self(t)) / delta
        if hi > 0.0:
            return (self(t) - self(t - delta)) / delta
        return (self(hi) - self(lo)) / (2.0 * delta)


@dataclass(frozen=True)
class OscillatoryProblem:
    """dx/dt = f(x(t), x(t - tau), t, Omega t; Omega) with x = phi on [-tau, 0]"""

    dim: int
    rhs: OscillatoryRHS
    delay: float
    history: HistoryFunction
    t_max: float = 2.0
    omega: Optional[float] = None
    name: str = "oscillatory"

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.delay <= 0:
            raise ValueError(f"delay must be > 0, got {self.delay}")
        if self.t_max <= 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")

    def f(self, x: Array, y: Array, t: float, theta: float, Omega: float) -> Array:
        return np.asarray(self.rhs(x, y, t, theta, Omega), dtype=float)

    def periodicity_defect(self, rng: np.random.Generator, samples: int = 100, Omega: float = 1.0) -> float:
        """Max relative change of rhs under theta -> theta + 2 pi at random samples."""
        worst = 0.0
        center = self.history(0.0)
        for _ in range(samples):
            x = center + rng.uniform(-0.25, 0.25, self.dim)
            y = center + rng.uniform(-0.25, 0.25, self.dim)
            t = rng.uniform(0.0, self.t_max)
            theta = rng.uniform(0.0, 2.0 * np.pi)
            a = self.f(x, y, t, theta, Omega)
            b = self.f(x, y, t, theta + 2.0 * np.pi, Omega)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
        return worst


@dataclass(frozen=True)
class AveragedProblem:
    """Two-phase averaged system: phase 1 on [0, tau), phase 2 on [tau, t_max]"""

    dim: int
    rhs_phase1: PhaseOneRHS
    rhs_phase2: PhaseTwoRHS
    delay: float
    history: HistoryFunction
    omega: float
    t_max: float = 2.0
    name: str = "averaged"
    jump_times: tuple = field(default=())

    def __post_init__(self) -> None:
        if self.delay <= 0:
            raise ValueError(f"delay must be > 0, got {self.delay}")
        if not self.jump_times:
            object.__setattr__(self, "jump_times", (self.delay,))

    def rhs(self, t: float, X: Array, Y: Array, Z: Optional[Array]) -> Array:
        """Dispatch to the phase valid at ``t``; Z is only read for t >= tau."""
        if t < self.delay:
            dphi = self.history.derivative(t - self.delay)
            return np.asarray(self.rhs_phase1(X, Y, dphi, t, self.omega), dtype=float)
        if Z is None:
            raise ValueError(f"phase 2 at t={t:.6g} needs the state two delays back")
        return np.asarray(self.rhs_phase2(X, Y, Z, t, self.omega), dtype=float)


def history_value(problem: OscillatoryProblem, t: float) -> Array:
    """phi(t) for -tau <= t <= 0."""
    return problem.history(t)
