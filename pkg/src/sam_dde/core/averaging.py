"""
Stroboscopically averaged right-hand side from a finite Fourier description

The oscillatory field is f(X, Y, theta) = sum_k exp(i k theta) f_k(X, Y) with
f_{-k} = conj(f_k). The averaged system is f_0 plus O(1/Omega) corrections made of
Lie-Jacobi brackets [f_i, f_j] = (df_j/dX) f_i - (df_i/dX) f_j and Y-derivatives of
the oscillatory modes contracted with the history slope (phase 1, t < tau) or with
the modes evaluated one delay back at (Y, Z) (phase 2, t >= tau).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..config import get_config
from ..error_handling import DeclarationMismatch, NonRealResult
from ..models.problem import Array, AveragedProblem, HistoryFunction
from ..utils.logging import get_sam_logger

logger = get_sam_logger(__name__)

# (k, X, Y) -> f_k(X, Y), complex
CoeffFn = Callable[[int, Array, Array], Array]
# (k, X, Y, direction) -> (df_k/dX or df_k/dY) . direction, complex
JacobianAction = Callable[[int, Array, Array, Array], Array]
# (X, Y, theta) -> real field value
ThetaRHS = Callable[[Array, Array, float], Array]


@dataclass(frozen=True)
class FourierProblem:
    dim: int
    max_harmonic: int
    coeff: CoeffFn
    delay: float
    history: HistoryFunction
    declared_h1: bool
    jac_x: Optional[JacobianAction] = None
    jac_y: Optional[JacobianAction] = None
    rhs: Optional[ThetaRHS] = None
    name: str = "fourier"

    @property
    def uses_fd_jacobian(self) -> bool:
        return self.jac_x is None or self.jac_y is None

    def f(self, k: int, X: Array, Y: Array) -> Array:
        if abs(k) > self.max_harmonic:
            return np.zeros(self.dim, dtype=complex)
        return np.asarray(self.coeff(k, X, Y), dtype=complex)

    def _fd(self, k: int, X: Array, Y: Array, d: Array, wrt_x: bool) -> Array:
        delta = get_config().averaging.fd_delta
        norm = float(np.max(np.abs(d)))
        if norm == 0.0:
            return np.zeros(self.dim, dtype=complex)
        base = X if wrt_x else Y
        eps = delta * max(1.0, float(np.max(np.abs(base)))) / norm
        if wrt_x:
            return (self.f(k, X + eps * d, Y) - self.f(k, X - eps * d, Y)) / (2.0 * eps)
        return (self.f(k, X, Y + eps * d) - self.f(k, X, Y - eps * d)) / (2.0 * eps)

    def dfdx(self, k: int, X: Array, Y: Array, d: Array) -> Array:
        if abs(k) > self.max_harmonic:
            return np.zeros(self.dim, dtype=complex)
        if self.jac_x is None:
            return self._fd(k, X, Y, d, wrt_x=True)
        return np.asarray(self.jac_x(k, X, Y, d), dtype=complex)

    def dfdy(self, k: int, X: Array, Y: Array, d: Array) -> Array:
        if abs(k) > self.max_harmonic:
            return np.zeros(self.dim, dtype=complex)
        if self.jac_y is None:
            return self._fd(k, X, Y, d, wrt_x=False)
        return np.asarray(self.jac_y(k, X, Y, d), dtype=complex)

    def harmonics(self) -> range:
        return range(1, self.max_harmonic + 1)


@dataclass(frozen=True)
class AveragedEval:
    value: Array
    imag_residual: float


def _finish(total: Array, problem: FourierProblem) -> AveragedEval:
    residual = float(np.max(np.abs(total.imag))) if total.size else 0.0
    tolerance = get_config().averaging.imag_tolerance
    if residual > tolerance:
        raise NonRealResult(residual, tolerance).annotate(problem=problem.name)
    return AveragedEval(value=np.ascontiguousarray(total.real), imag_residual=residual)


def f0(problem: FourierProblem, X: Array, Y: Array) -> Array:
    return problem.f(0, X, Y).real.copy()


def commutator(problem: FourierProblem, i: int, j: int, X: Array, Y: Array) -> Array:
    """[f_i, f_j] = (df_j/dX) f_i - (df_i/dX) f_j at (X, Y)."""
    return problem.dfdx(j, X, Y, problem.f(i, X, Y)) - problem.dfdx(i, X, Y, problem.f(j, X, Y))


def _bracket_sum(problem: FourierProblem, X: Array, Y: Array, Omega: float) -> Array:
    total = problem.f(0, X, Y).copy()
    for k in problem.harmonics():
        term = commutator(problem, k, 0, X, Y) - commutator(problem, -k, 0, X, Y)
        term = term + commutator(problem, -k, k, X, Y)
        total += (1j / (k * Omega)) * term
    return total


def _nonzero_harmonics(problem: FourierProblem):
    for k in problem.harmonics():
        yield k
        yield -k


def averaged_rhs_phase1(
    problem: FourierProblem, X: Array, Y: Array, dphi: Array, t: float, Omega: float
) -> AveragedEval:
    """Averaged field on 0 <= t < tau; dphi is the history slope at t - tau."""
    total = _bracket_sum(problem, X, Y, Omega)
    for k in _nonzero_harmonics(problem):
        total -= (1j / (k * Omega)) * problem.dfdy(k, X, Y, dphi)
    return _finish(total, problem)


def _phase2_total(
    problem: FourierProblem, X: Array, Y: Array, Z: Array, Omega: float, delay_phase: bool
) -> Array:
    total = _bracket_sum(problem, X, Y, Omega)
    f0_lag = problem.f(0, Y, Z)
    for k in _nonzero_harmonics(problem):
        c = 1j / (k * Omega)
        total -= c * problem.dfdy(k, X, Y, f0_lag)
        total += c * problem.dfdy(0, X, Y, problem.f(k, Y, Z))
        phase = np.exp(1j * k * Omega * problem.delay) if delay_phase else 1.0
        total += c * phase * problem.dfdy(k, X, Y, problem.f(-k, Y, Z))
    return total


def averaged_rhs_phase2(
    problem: FourierProblem, X: Array, Y: Array, Z: Array, Omega: float
) -> AveragedEval:
    """Averaged field on t >= tau, with the lagged modes f_k(Y, Z)."""
    return _finish(_phase2_total(problem, X, Y, Z, Omega, delay_phase=True), problem)


def check_h1(problem: FourierProblem, rng: Optional[np.random.Generator] = None) -> bool:
    """Probe that the oscillatory modes do not depend on the delayed argument."""
    cfg = get_config().averaging
    rng = rng if rng is not None else np.random.default_rng(get_config().seed)
    tolerance = cfg.h1_tolerance if not problem.uses_fd_jacobian else max(cfg.h1_tolerance, 1e-6)
    worst = 0.0
    for _ in range(cfg.probe_count):
        X, Y = _probe_state(problem, rng), _probe_state(problem, rng)
        d = rng.standard_normal(problem.dim)
        for k in _nonzero_harmonics(problem):
            worst = max(worst, float(np.max(np.abs(problem.dfdy(k, X, Y, d)))))
    measured = worst <= tolerance
    if measured != problem.declared_h1:
        raise DeclarationMismatch(problem.declared_h1, measured, worst).annotate(problem=problem.name)
    logger.debug("H1 probe", problem=problem.name, h1=measured, max_norm=worst)
    return measured


def check_h2(tau: float, Omega: float, rel_tol: float = 1e-9) -> bool:
    """True when the delay is a whole number of forcing periods."""
    if tau <= 0 or Omega <= 0:
        raise ValueError("tau and Omega must be > 0")
    q = Omega * tau / (2.0 * math.pi)
    k = round(q)
    return k >= 1 and abs(q - k) <= rel_tol * max(1.0, q)


def slope_oracle(
    problem: FourierProblem,
    case: int,
    X: Array,
    Y: Array,
    Z: Optional[Array] = None,
    t: float = 0.0,
    Omega: float = 1.0,
    dphi: Optional[Array] = None,
) -> Array:
    """Leading terms of the slope a SAM difference quotient reproduces.

    1 and 3: f_0 (forward differences at n = 0 and n = N).
    2: the phase-1 averaged field (central differences, 0 < t_n < tau).
    4: the phase-2 averaged field without the exp(i k Omega tau) factor.
    """
    if case in (1, 3):
        return f0(problem, X, Y)
    if case == 2:
        if dphi is None:
            dphi = problem.history.derivative(t - problem.delay)
        return averaged_rhs_phase1(problem, X, Y, dphi, t, Omega).value
    if case == 4:
        if Z is None:
            raise ValueError("case 4 needs Z")
        return _finish(_phase2_total(problem, X, Y, Z, Omega, delay_phase=False), problem).value
    raise ValueError(f"case must be 1..4, got {case}")


def averaged_problem_from_fourier(
    problem: FourierProblem, Omega: float, t_max: float = 2.0
) -> AveragedProblem:
    """AveragedProblem whose two phases evaluate the Fourier formulas directly."""

    def phase1(X: Array, Y: Array, dphi: Array, t: float, W: float) -> Array:
        return averaged_rhs_phase1(problem, X, Y, dphi, t, W).value

    def phase2(X: Array, Y: Array, Z: Array, t: float, W: float) -> Array:
        return averaged_rhs_phase2(problem, X, Y, Z, W).value

    return AveragedProblem(
        dim=problem.dim,
        rhs_phase1=phase1,
        rhs_phase2=phase2,
        delay=problem.delay,
        history=problem.history,
        omega=Omega,
        t_max=t_max,
        name=f"{problem.name}-fourier",
    )


def trapezoid_average(rhs: Callable[[float], Array], n: int = 64) -> Array:
    """theta-average of a 2 pi-periodic function on n equispaced nodes."""
    thetas = 2.0 * np.pi * np.arange(n) / n
    return np.mean(np.stack([np.asarray(rhs(float(th)), dtype=float) for th in thetas]), axis=0)


def _probe_state(problem: FourierProblem, rng: np.random.Generator) -> Array:
    center = problem.history(0.0)
    radius = 0.25 * np.maximum(1.0, np.abs(center))
    return center + radius * rng.uniform(-1.0, 1.0, problem.dim)


def hermitian_defect(problem: FourierProblem, rng: np.random.Generator, probes: int = 50) -> float:
    """max |f_{-k} - conj(f_k)| over random probes."""
    worst = 0.0
    for _ in range(probes):
        X, Y = _probe_state(problem, rng), _probe_state(problem, rng)
        for k in problem.harmonics():
            worst = max(worst, float(np.max(np.abs(problem.f(-k, X, Y) - np.conj(problem.f(k, X, Y))))))
    return worst


def reconstruction_defect(problem: FourierProblem, rng: np.random.Generator, probes: int = 50) -> float:
    """max |sum_k exp(i k theta) f_k - f(X, Y, theta)| over random probes."""
    if problem.rhs is None:
        raise ValueError(f"{problem.name} has no theta right-hand side to compare with")
    worst = 0.0
    for _ in range(probes):
        X, Y = _probe_state(problem, rng), _probe_state(problem, rng)
        theta = float(rng.uniform(0.0, 2.0 * np.pi))
        total = problem.f(0, X, Y).copy()
        for k in _nonzero_harmonics(problem):
            total += np.exp(1j * k * theta) * problem.f(k, X, Y)
        worst = max(worst, float(np.max(np.abs(total - np.asarray(problem.rhs(X, Y, theta))))))
    return worst
