"""
Toggle switch with O(Omega) forcing, B_hat Omega sin(Omega t), on the first gene

The averaged system comes from the stroboscopic change of variables
x1 = X1 + B_hat (1 - cos(Omega t)), x2 = X2, after which the forcing is O(1).
For beta = 2 the theta-average of the second component has a closed form.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..error_handling import NonFiniteState, UnsupportedBeta
from ..models.problem import Array, AveragedProblem, OscillatoryProblem
from .toggle import ToggleParams, hill

# Roundoff allowance below zero for -M/2 + sqrt(N)/2
_SQRT_GUARD = 1e-12


@dataclass(frozen=True)
class GenePair:
    params: ToggleParams
    oscillatory: OscillatoryProblem
    averaged: AveragedProblem
    to_oscillatory: Callable[[float, Array], Array]
    from_oscillatory: Callable[[float, Array], Array]
    # (X, Y, t, theta, Omega) -> right-hand side after the change of variables
    transformed_rhs: Callable[[Array, Array, float, float, float], Array]


def gene_oscillatory(params: ToggleParams, Omega: float) -> OscillatoryProblem:
    p = params

    def rhs(x: Array, y: Array, t: float, theta: float, W: float) -> Array:
        return np.array(
            [
                hill(p, x[1]) - y[0] + p.A * np.sin(p.omega_slow * t) + p.B_hat * W * np.sin(theta),
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
        name="toggle-gene",
    )


def averaged_hill(params: ToggleParams, X1: float) -> float:
    """theta-average of alpha / (1 + (X1 + B_hat (1 - cos theta))^2).

    With a = X1 + B_hat, M = X1^2 + 2 B_hat X1 - 1 and N = M^2 + 4 a^2 this is
    alpha (p + |a| q) / (q^4 + a^2 + sqrt(N)), p = sqrt(-M/2 + sqrt(N)/2),
    q = sqrt(M/2 + sqrt(N)/2).
    """
    if params.beta != 2.0:
        raise UnsupportedBeta(params.beta)
    b = params.B_hat
    a = X1 + b
    M = X1 * X1 + 2.0 * b * X1 - 1.0
    root_n = float(np.sqrt(M * M + 4.0 * a * a))
    under = -0.5 * M + 0.5 * root_n
    if under < 0.0:
        if under < -_SQRT_GUARD:
            raise NonFiniteState("averaged_hill", {"radicand": under, "X1": X1})
        under = 0.0
    p = np.sqrt(under)
    q2 = 0.5 * M + 0.5 * root_n
    q = np.sqrt(max(q2, 0.0))
    return float(params.alpha * (p + abs(a) * q) / (q2 * q2 + a * a + root_n))


def gene_averaged(params: ToggleParams, Omega: float) -> AveragedProblem:
    if params.beta != 2.0:
        raise UnsupportedBeta(params.beta)
    p = params

    def phase1(X: Array, Y: Array, dphi: Array, t: float, W: float) -> Array:
        return np.array(
            [
                hill(p, X[1]) - Y[0] + p.A * np.sin(p.omega_slow * t),
                averaged_hill(p, float(X[0])) - Y[1],
            ]
        )

    def phase2(X: Array, Y: Array, Z: Array, t: float, W: float) -> Array:
        out = phase1(X, Y, np.zeros(2), t, W)
        out[0] -= p.B_hat
        return out

    return AveragedProblem(
        dim=2,
        rhs_phase1=phase1,
        rhs_phase2=phase2,
        delay=p.tau,
        history=p.constant_history(),
        omega=Omega,
        t_max=p.t_max,
        name="toggle-gene-averaged",
    )


def geneproblem_pair(params: ToggleParams, Omega: float) -> GenePair:
    """Oscillatory problem, its averaged system and the change of variables between them."""
    p = params
    averaged = gene_averaged(p, Omega)

    def shift(t: float) -> Array:
        return np.array([p.B_hat * (1.0 - np.cos(Omega * t)), 0.0])

    def to_oscillatory(t: float, X: Array) -> Array:
        return np.asarray(X, dtype=float) + shift(t)

    def from_oscillatory(t: float, x: Array) -> Array:
        return np.asarray(x, dtype=float) - shift(t)

    def transformed_rhs(X: Array, Y: Array, t: float, theta: float, W: float) -> Array:
        # Y is the lagged transformed state; before t = tau it is phi itself
        lag_shift = p.B_hat * (1.0 - np.cos(theta - W * p.tau)) if t >= p.tau else 0.0
        return np.array(
            [
                hill(p, X[1]) - Y[0] - lag_shift + p.A * np.sin(p.omega_slow * t),
                hill(p, X[0] + p.B_hat * (1.0 - np.cos(theta))) - Y[1],
            ]
        )

    return GenePair(
        params=p,
        oscillatory=gene_oscillatory(p, Omega),
        averaged=averaged,
        to_oscillatory=to_oscillatory,
        from_oscillatory=from_oscillatory,
        transformed_rhs=transformed_rhs,
    )
