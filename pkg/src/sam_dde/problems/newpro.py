"""
Scalar test equation whose oscillatory modes depend on the delayed state

    x' = y + (x - y) sin(Omega t) + (y / 2) cos(2 Omega t),   y = x(t - tau)
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.averaging import FourierProblem
from ..models.problem import Array, AveragedProblem, HistoryFunction, OscillatoryProblem


@dataclass(frozen=True)
class ScalarParams:
    tau: float = 0.5
    phi: float = 0.1
    t_max: float = 2.0


def _history(p: ScalarParams) -> HistoryFunction:
    return HistoryFunction.constant([p.phi], p.tau)


def newpro_oscillatory(Omega: float, params: ScalarParams = ScalarParams()) -> OscillatoryProblem:
    def rhs(x: Array, y: Array, t: float, theta: float, W: float) -> Array:
        return y + (x - y) * np.sin(theta) + 0.5 * y * np.cos(2.0 * theta)

    return OscillatoryProblem(
        dim=1,
        rhs=rhs,
        delay=params.tau,
        history=_history(params),
        t_max=params.t_max,
        omega=Omega,
        name="newpro",
    )


def newpro_averaged(Omega: float, params: ScalarParams = ScalarParams()) -> AveragedProblem:
    tau = params.tau

    def phase1(X: Array, Y: Array, dphi: Array, t: float, W: float) -> Array:
        return Y - Y / W

    def phase2(X: Array, Y: Array, Z: Array, t: float, W: float) -> Array:
        return Y + (0.5 * Y - 0.5 * Z) * np.sin(W * tau) / W - Z * np.sin(2.0 * W * tau) / (16.0 * W)

    return AveragedProblem(
        dim=1,
        rhs_phase1=phase1,
        rhs_phase2=phase2,
        delay=tau,
        history=_history(params),
        omega=Omega,
        t_max=params.t_max,
        name="newpro-averaged",
    )


def newpro_fourier(params: ScalarParams = ScalarParams()) -> FourierProblem:
    """Modes f_0 = y, f_{+-1} = +-(x - y)/(2i), f_{+-2} = y/4."""

    def coeff(k: int, X: Array, Y: Array) -> Array:
        if k == 0:
            return Y.astype(complex)
        if abs(k) == 1:
            return np.sign(k) * (X - Y) / 2j
        if abs(k) == 2:
            return (Y / 4.0).astype(complex)
        return np.zeros(1, dtype=complex)

    def jac_x(k: int, X: Array, Y: Array, d: Array) -> Array:
        if abs(k) == 1:
            return np.sign(k) * d / 2j
        return np.zeros(1, dtype=complex)

    def jac_y(k: int, X: Array, Y: Array, d: Array) -> Array:
        if k == 0:
            return d.astype(complex)
        if abs(k) == 1:
            return -np.sign(k) * d / 2j
        if abs(k) == 2:
            return (d / 4.0).astype(complex)
        return np.zeros(1, dtype=complex)

    def theta_rhs(X: Array, Y: Array, theta: float) -> Array:
        return Y + (X - Y) * np.sin(theta) + 0.5 * Y * np.cos(2.0 * theta)

    return FourierProblem(
        dim=1,
        max_harmonic=2,
        coeff=coeff,
        delay=params.tau,
        history=_history(params),
        declared_h1=False,
        jac_x=jac_x,
        jac_y=jac_y,
        rhs=theta_rhs,
        name="newpro-fourier",
    )


def newpro_problem(
    Omega: float, params: ScalarParams = ScalarParams()
) -> Tuple[OscillatoryProblem, AveragedProblem, FourierProblem]:
    return newpro_oscillatory(Omega, params), newpro_averaged(Omega, params), newpro_fourier(params)
