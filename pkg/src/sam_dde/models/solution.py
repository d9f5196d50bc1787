"""
Solution containers
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..error_handling import OutOfDomain
from .grid import GridParams
from .problem import Array, HistoryFunction


class SlopeKind(Enum):
    CENTRAL = "central"
    FORWARD = "forward"


@dataclass(frozen=True)
class SlopeRecord:
    n: int
    value: Array
    kind: SlopeKind


@dataclass
class MicroTrajectory:
    """Euler micro trajectory u_{n,nu}, nu in [-nu_max, nu_max]; row nu + nu_max.

    Rows not yet integrated hold NaN.
    """

    n: int
    anchor_time: float
    nu_max: int
    values: Array

    @classmethod
    def empty(cls, n: int, anchor_time: float, nu_max: int, dim: int) -> "MicroTrajectory":
        return cls(n, anchor_time, nu_max, np.full((2 * nu_max + 1, dim), np.nan))

    def at(self, nu: int) -> Array:
        if abs(nu) > self.nu_max:
            raise IndexError(f"nu={nu} outside [-{self.nu_max}, {self.nu_max}]")
        return self.values[nu + self.nu_max]

    @property
    def seed(self) -> Array:
        return self.values[self.nu_max]

    @property
    def forward_end(self) -> Array:
        return self.values[-1]

    @property
    def backward_end(self) -> Array:
        return self.values[0]


@dataclass
class SamSolution:
    """Macro step points t_n = n tau / N with states X_n and bookkeeping"""

    grid: GridParams
    times: Array
    states: Array
    slopes: List[SlopeRecord]
    micro_store: Dict[int, MicroTrajectory]
    eval_count: int
    wall_time: float = 0.0
    forward_only: bool = False

    @property
    def M(self) -> int:
        return len(self.times) - 1

    def component(self, index: int) -> Array:
        return self.states[:, index]


def _hermite(t: Array, t0: Array, t1: Array, y0: Array, y1: Array, f0: Array, f1: Array) -> Array:
    """Cubic Hermite interpolant on [t0, t1]; broadcast over leading axis."""
    dt = t1 - t0
    s = ((t - t0) / dt)[:, None]
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    d = dt[:, None]
    return h00 * y0 + h01 * y1 + d * (h10 * f0 + h11 * f1)


def _hermite_derivative(t: Array, t0: Array, t1: Array, y0: Array, y1: Array, f0: Array, f1: Array) -> Array:
    dt = t1 - t0
    s = ((t - t0) / dt)[:, None]
    s2 = s * s
    d = dt[:, None]
    return (6 * s2 - 6 * s) * (y0 - y1) / d + (3 * s2 - 4 * s + 1) * f0 + (3 * s2 - 2 * s) * f1


@dataclass
class DenseSolution:
    """Piecewise cubic Hermite reference trajectory on [-tau, t_end]

    Segment i spans [mesh[i], mesh[i+1]] with end slopes f_left[i], f_right[i].
    """

    history: HistoryFunction
    mesh: Array
    states: Array
    f_left: Array
    f_right: Array
    breakpoints: Array
    n_accepted: int = 0
    n_rejected: int = 0
    n_evals: int = 0
    meta: Dict[str, float] = field(default_factory=dict)

    @property
    def t_end(self) -> float:
        return float(self.mesh[-1])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def _segments(self, ts: Array) -> Array:
        idx = np.searchsorted(self.mesh, ts, side="right") - 1
        return np.clip(idx, 0, len(self.mesh) - 2)

    def _check(self, ts: Array) -> None:
        slack = 1e-12 * max(1.0, abs(self.t_end))
        bad = (ts < -self.history.tau - slack) | (ts > self.t_end + slack)
        if np.any(bad):
            t = float(ts[np.argmax(bad)])
            raise OutOfDomain(t, -self.history.tau, self.t_end)

    def eval_many(self, ts: Sequence[float]) -> Array:
        """Evaluate at several times; shape (len(ts), D)."""
        ts = np.asarray(ts, dtype=float)
        self._check(ts)
        out = np.empty((ts.size, self.dim))
        past = ts < 0.0
        if np.any(past):
            out[past] = self.history.values(ts[past])
        now = ~past
        if np.any(now):
            t = np.minimum(ts[now], self.t_end)
            i = self._segments(t)
            out[now] = _hermite(
                t, self.mesh[i], self.mesh[i + 1], self.states[i], self.states[i + 1], self.f_left[i], self.f_right[i]
            )
        return out

    def eval(self, t: float) -> Array:
        return self.eval_many([t])[0]

    __call__ = eval

    def derivative(self, t: float) -> Array:
        """Time derivative of the interpolant (right-sided at mesh points)."""
        if t < 0.0:
            return self.history.derivative(t)
        ts = np.asarray([min(t, self.t_end)])
        self._check(ts)
        i = self._segments(ts)
        return _hermite_derivative(
            ts, self.mesh[i], self.mesh[i + 1], self.states[i], self.states[i + 1], self.f_left[i], self.f_right[i]
        )[0]

    def to_arrays(self) -> Dict[str, Array]:
        return {
            "mesh": self.mesh,
            "states": self.states,
            "f_left": self.f_left,
            "f_right": self.f_right,
            "breakpoints": self.breakpoints,
            "stats": np.array([self.n_accepted, self.n_rejected, self.n_evals]),
        }

    @classmethod
    def from_arrays(cls, arrays: Dict[str, Array], history: HistoryFunction) -> "DenseSolution":
        stats = arrays.get("stats", np.zeros(3, dtype=int))
        return cls(
            history=history,
            mesh=np.asarray(arrays["mesh"]),
            states=np.asarray(arrays["states"]),
            f_left=np.asarray(arrays["f_left"]),
            f_right=np.asarray(arrays["f_right"]),
            breakpoints=np.asarray(arrays["breakpoints"]),
            n_accepted=int(stats[0]),
            n_rejected=int(stats[1]),
            n_evals=int(stats[2]),
        )


def max_step_point_error(
    solution: SamSolution, reference: DenseSolution, component: Optional[int] = 0
) -> float:
    """max_n |X_n - ref(t_n)| on one component (or all when component is None)."""
    ref = reference.eval_many(solution.times)
    diff = np.abs(solution.states - ref)
    if component is not None:
        diff = diff[:, component]
    return float(np.max(diff))
