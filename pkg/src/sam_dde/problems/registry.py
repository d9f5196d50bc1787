"""
Problem selection by name
"""

from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, Mapping, Optional

from ..core.averaging import FourierProblem
from ..error_handling import ConfigValidationError
from ..models.problem import AveragedProblem, OscillatoryProblem
from .gene import GenePair, geneproblem_pair
from .newpro import ScalarParams, newpro_problem
from .toggle import ToggleParams, toggle_averaged, toggle_fourier, toggle_oscillatory


@dataclass(frozen=True)
class ProblemBundle:
    name: str
    oscillatory: OscillatoryProblem
    averaged: AveragedProblem
    fourier: Optional[FourierProblem] = None
    gene: Optional[GenePair] = None
    # nu_max = c * N
    default_c: int = 2
    error_component: int = 0
    h1_declared: bool = True


def _toggle(Omega: float, overrides: Mapping[str, Any]) -> ProblemBundle:
    params = ToggleParams().with_overrides(overrides)
    return ProblemBundle(
        name="toggle",
        oscillatory=toggle_oscillatory(params, Omega),
        averaged=toggle_averaged(params, Omega),
        fourier=toggle_fourier(params),
    )


def _gene(Omega: float, overrides: Mapping[str, Any]) -> ProblemBundle:
    params = ToggleParams().with_overrides(overrides)
    pair = geneproblem_pair(params, Omega)
    return ProblemBundle(
        name="toggle-gene",
        oscillatory=pair.oscillatory,
        averaged=pair.averaged,
        gene=pair,
    )


def _newpro(Omega: float, overrides: Mapping[str, Any]) -> ProblemBundle:
    known = {f.name for f in fields(ScalarParams)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ConfigValidationError("overrides", unknown, f"unknown newpro parameter(s); known: {sorted(known)}")
    params = ScalarParams(**{k: float(v) for k, v in overrides.items()})
    if params.tau <= 0:
        raise ConfigValidationError("tau", params.tau, "must be > 0")
    osc, avg, fourier = newpro_problem(Omega, params)
    return ProblemBundle(
        name="newpro",
        oscillatory=osc,
        averaged=avg,
        fourier=fourier,
        default_c=5,
        h1_declared=False,
    )


_REGISTRY: Dict[str, Callable[[float, Mapping[str, Any]], ProblemBundle]] = {
    "toggle": _toggle,
    "toggle-gene": _gene,
    "newpro": _newpro,
}


def problem_names() -> list:
    return sorted(_REGISTRY)


def get_problem(name: str, Omega: float, overrides: Optional[Mapping[str, Any]] = None) -> ProblemBundle:
    """Build the named problem at forcing frequency Omega with parameter overrides."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigValidationError("problem", name, f"unknown problem; choose one of {problem_names()}") from None
    return factory(Omega, dict(overrides or {}))
