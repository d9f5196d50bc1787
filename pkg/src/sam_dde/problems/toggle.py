"""
Time-delayed genetic toggle switch under slow and fast sinusoidal forcing

    x1' = alpha / (1 + x2^beta) - x1(t - tau) + A sin(omega t) + B sin(Omega t)
    x2' = alpha / (1 + x1^beta) - x2(t - tau)
"""

from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Tuple

import numpy as np

from ..core.averaging import FourierProblem
from ..error_handling import ConfigValidationError
from ..models.problem import Array, AveragedProblem, HistoryFunction, OscillatoryProblem


@dataclass(frozen=True)
class ToggleParams:
    alpha: float = 2.5
    beta: float = 2.0
    A: float = 0.1
    omega_slow: float = 0.1
    B: float = 4.0
    tau: float = 0.5
    B_hat: float = 0.1
    t_max: float = 2.0
    history: Tuple[float, float] = (0.5, 2.0)

    def __post_init__(self) -> None:
        if self.beta < 1:
            raise ConfigValidationError("beta", self.beta, "must be >= 1")
        if self.tau <= 0:
            raise ConfigValidationError("tau", self.tau, "must be > 0")
        if self.t_max <= 0:
            raise ConfigValidationError("t_max", self.t_max, "must be > 0")

    def with_overrides(self, overrides: Mapping[str, Any]) -> "ToggleParams":
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigValidationError("overrides", unknown, f"unknown toggle parameter(s); known: {sorted(known)}")
        values: Dict[str, Any] = dict(overrides)
        if "history" in values:
            values["history"] = tuple(float(v) for v in values["history"])
        return replace(self, **values)

    def constant_history(self) -> HistoryFunction:
        return HistoryFunction.constant(self.history, self.tau)


def hill(p: ToggleParams, s: Array) -> Array:
    """alpha / (1 + s^beta)."""
    return p.alpha / (1.0 + s**p.beta)


def hill_slope(p: ToggleParams, s: Array) -> Array:
    """d/ds alpha / (1 + s^beta) = -alpha beta s^(beta-1) / (1 + s^beta)^2."""
    return -p.alpha * p.beta * s ** (p.beta - 1.0) / (1.0 + s**p.beta) ** 2


def toggle_oscillatory(params: ToggleParams, Omega: float) -> OscillatoryProblem:
    p = params

    def rhs(x: Array, y: Array, t: float, theta: float, W: float) -> Array:
        return np.array(
            [
                hill(p, x[1]) - y[0] + p.A * np.sin(p.omega_slow * t) + p.B * np.sin(theta),
                hill(p, x[0]) - y[1],
            ]
        )

    return OscillatoryProblem(
        dim=2,
        rhs=rhs,
        delay=p.tau,
        history=p.constant_history(),
        t_max=p.t_max,
        omega=Omega,
        name="toggle",
    )


def toggle_averaged(params: ToggleParams, Omega: float) -> AveragedProblem:
    """Hand-derived averaged toggle; the -B/Omega drift switches on at t = tau."""
    p = params

    def phase1(X: Array, Y: Array, dphi: Array, t: float, W: float) -> Array:
        return np.array(
            [
                hill(p, X[1]) - Y[0] + p.A * np.sin(p.omega_slow * t),
                hill(p, X[0]) - Y[1] + (p.B / W) * hill_slope(p, X[0]),
            ]
        )

    def phase2(X: Array, Y: Array, Z: Array, t: float, W: float) -> Array:
        out = phase1(X, Y, np.zeros(2), t, W)
        out[0] -= p.B / W
        return out

    return AveragedProblem(
        dim=2,
        rhs_phase1=phase1,
        rhs_phase2=phase2,
        delay=p.tau,
        history=p.constant_history(),
        omega=Omega,
        t_max=p.t_max,
        name="toggle-averaged",
    )


def toggle_fourier(params: ToggleParams) -> FourierProblem:
    """Fourier description with slow time appended as a third state (s' = 1)."""
    p = params
    zero = np.zeros(3, dtype=complex)

    def coeff(k: int, X: Array, Y: Array) -> Array:
        if k == 0:
            return np.array(
                [
                    hill(p, X[1]) - Y[0] + p.A * np.sin(p.omega_slow * X[2]),
                    hill(p, X[0]) - Y[1],
                    1.0,
                ],
                dtype=complex,
            )
        if abs(k) == 1:
            # B sin(theta) = B/(2i) e^{i theta} - B/(2i) e^{-i theta}
            return np.array([k * p.B / 2j, 0.0, 0.0], dtype=complex)
        return zero.copy()

    def jac_x(k: int, X: Array, Y: Array, d: Array) -> Array:
        if k != 0:
            return zero.copy()
        return np.array(
            [
                hill_slope(p, X[1]) * d[1] + p.A * p.omega_slow * np.cos(p.omega_slow * X[2]) * d[2],
                hill_slope(p, X[0]) * d[0],
                0.0,
            ],
            dtype=complex,
        )

    def jac_y(k: int, X: Array, Y: Array, d: Array) -> Array:
        if k != 0:
            return zero.copy()
        return np.array([-d[0], -d[1], 0.0], dtype=complex)

    def theta_rhs(X: Array, Y: Array, theta: float) -> Array:
        return np.array(
            [
                hill(p, X[1]) - Y[0] + p.A * np.sin(p.omega_slow * X[2]) + p.B * np.sin(theta),
                hill(p, X[0]) - Y[1],
                1.0,
            ]
        )

    v = np.array([*p.history, 0.0])
    history = HistoryFunction(
        value_fn=lambda t: v + np.array([0.0, 0.0, t]),
        tau=p.tau,
        deriv_fn=lambda _t: np.array([0.0, 0.0, 1.0]),
    )
    return FourierProblem(
        dim=3,
        max_harmonic=1,
        coeff=coeff,
        delay=p.tau,
        history=history,
        declared_h1=True,
        jac_x=jac_x,
        jac_y=jac_y,
        rhs=theta_rhs,
        name="toggle-fourier",
    )
