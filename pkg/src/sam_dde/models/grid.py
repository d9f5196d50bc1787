"""
Macro/micro discretization parameters
"""

import math
from dataclasses import dataclass
from typing import Optional

from ..error_handling import InfeasibleGrid


@dataclass(frozen=True)
class GridParams:
    """N macro steps per delay, nu_max Euler micro steps per period"""

    N: int
    nu_max: int
    Omega: float
    tau: float

    def __post_init__(self) -> None:
        if self.N < 1 or self.nu_max < 1:
            raise ValueError(f"N and nu_max must be >= 1 (got N={self.N}, nu_max={self.nu_max})")
        if self.Omega <= 0 or self.tau <= 0:
            raise ValueError(f"Omega and tau must be > 0 (got Omega={self.Omega}, tau={self.tau})")

    @property
    def H(self) -> float:
        return self.tau / self.N

    @property
    def T(self) -> float:
        return 2.0 * math.pi / self.Omega

    @property
    def h(self) -> float:
        return self.T / self.nu_max

    @property
    def periods_per_step(self) -> float:
        """H / T = tau Omega / (2 pi N)."""
        return self.tau * self.Omega / (2.0 * math.pi * self.N)

    def step_time(self, n: int) -> float:
        return n * self.tau / self.N

    def last_index(self, t_max: float) -> int:
        """M = floor(t_max / H), robust to the rounding of t_max * N / tau."""
        return int(math.floor(t_max * self.N / self.tau + 1e-9))

    def is_stroboscopic(self, rel_tol: float = 1e-9) -> bool:
        """True when every step point is a whole number of periods."""
        q = self.periods_per_step
        k = round(q)
        return k >= 1 and abs(q - k) <= rel_tol * max(1.0, q)


def is_feasible(N: int, Omega: float, tau: float, ratio: float = 2.0, slack: float = 0.02) -> bool:
    """H >= ratio * T, relaxed by a relative slack."""
    return tau * Omega / (2.0 * math.pi * N) >= ratio * (1.0 - slack)


def make_grid(
    N: int,
    nu_max: int,
    Omega: float,
    tau: float,
    ratio: Optional[float] = None,
    slack: Optional[float] = None,
) -> GridParams:
    """Build a grid, raising InfeasibleGrid when the two-period micro window does not fit."""
    if ratio is None or slack is None:
        from ..config import get_config

        grid_cfg = get_config().grid
        ratio = grid_cfg.feasibility_ratio if ratio is None else ratio
        slack = grid_cfg.feasibility_slack if slack is None else slack

    grid = GridParams(N=N, nu_max=nu_max, Omega=Omega, tau=tau)
    if not is_feasible(N, Omega, tau, ratio, slack):
        raise InfeasibleGrid(N, Omega, tau, grid.periods_per_step, ratio * (1.0 - slack))
    return grid
