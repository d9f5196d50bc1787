"""
Request models for the sam-dde command line
"""

import math
import re
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..bench.sweep import OMEGA_LISTS
from ..problems.registry import problem_names

_TERM = re.compile(
    r"^(?P<coef>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?"
    r"(?P<pi>pi)?"
    r"(?:/(?P<den>\d+(?:\.\d*)?))?$"
)


def _split_terms(text: str) -> List[Tuple[int, str]]:
    terms: List[Tuple[int, str]] = []
    sign, start = 1, 0
    for i, ch in enumerate(text):
        # a sign after an exponent marker belongs to the number
        if ch in "+-" and i > 0 and text[i - 1] not in "eE":
            terms.append((sign, text[start:i]))
            sign, start = (1 if ch == "+" else -1), i + 1
        elif ch in "+-" and i == 0:
            sign, start = (1 if ch == "+" else -1), 1
    terms.append((sign, text[start:]))
    return terms


def parse_omega(text: str) -> float:
    """Frequency expression: sums of rational multiples of pi and plain numbers.

    Examples: ``8pi``, ``1024pi+pi``, ``8pi+pi/64``, ``25.1327``.
    """
    raw = str(text).strip().replace(" ", "").lower().replace("π", "pi")
    if not raw:
        raise ValueError("empty frequency")
    pi_part, plain = Fraction(0), Fraction(0)
    for sign, term in _split_terms(raw):
        m = _TERM.match(term)
        if not term or m is None or (m.group("coef") is None and m.group("pi") is None):
            raise ValueError(f"cannot parse frequency term {term!r} in {text!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("den"):
            coef /= Fraction(m.group("den"))
        if m.group("pi"):
            pi_part += sign * coef
        else:
            plain += sign * coef
    value = float(pi_part) * math.pi + float(plain)
    if not value > 0:
        raise ValueError(f"frequency must be > 0, got {text!r}")
    return value


def parse_omega_list(text: str) -> List[float]:
    """Comma-separated expressions, or the name of a built-in list (tab4, tab2, h2, noh2, ...)."""
    name = str(text).strip()
    if name in OMEGA_LISTS:
        return list(OMEGA_LISTS[name])
    return [parse_omega(part) for part in name.split(",") if part.strip()]


def parse_int_list(text: str) -> List[int]:
    return [int(part) for part in str(text).split(",") if part.strip()]


def parse_overrides(items: Optional[List[str]]) -> Dict[str, Any]:
    """``key=value`` pairs; comma-separated values become lists of floats."""
    out: Dict[str, Any] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"override must look like key=value, got {item!r}")
        parts = [float(v) for v in value.split(",")]
        out[key.strip()] = parts if len(parts) > 1 else parts[0]
    return out


Command = Literal["run", "reference", "table", "ratios", "avg-check", "timing"]


class RunConfig(BaseModel):
    """Validated command-line request; unknown fields are rejected."""

    model_config = ConfigDict(extra="forbid")

    command: Command = Field(description="Subcommand to execute")
    problem: str = Field(default="toggle", description="toggle | toggle-gene | newpro")
    overrides: Dict[str, Any] = Field(default_factory=dict, description="Problem parameter overrides")
    N: Optional[int] = Field(default=None, ge=1, description="Macro steps per delay interval")
    nu_max: Optional[int] = Field(default=None, ge=1, description="Micro steps per period")
    c: Optional[int] = Field(default=None, ge=1, description="nu_max = c * N when nu_max is not given")
    omega: Optional[float] = Field(default=None, gt=0, description="Forcing frequency")
    N_list: List[int] = Field(default_factory=list, description="Rows of an error table")
    omega_list: List[float] = Field(default_factory=list, description="Columns of an error table")
    preset: Optional[str] = Field(default=None, description="Built-in sweep (tab4, tab2, tab3, h2, noh2, gene)")
    reference: Literal["averaged", "oscillatory"] = Field(default="averaged")
    t_max: Optional[float] = Field(default=None, gt=0, description="End of the integration interval")
    forward_only: bool = Field(default=False, description="Forward differences at every macro step")
    points: int = Field(default=201, ge=2, description="Uniform output points for the reference command")
    samples: int = Field(default=100, ge=1, description="Random states probed by avg-check")
    tol: float = Field(default=1e-8, gt=0, description="Reference tolerance for timing")
    repeats: Optional[int] = Field(default=None, ge=1)
    csv_in: Optional[str] = Field(default=None, description="Read an existing table instead of sweeping")
    plot: Optional[str] = Field(default=None, description="Also write a gnuplot script here")
    out: Optional[str] = Field(default=None, description="Output path; stdout when omitted")
    format: Literal["csv"] = "csv"
    seed: Optional[int] = None

    @field_validator("omega", mode="before")
    @classmethod
    def _parse_omega(cls, v: Any) -> Any:
        if v is None or isinstance(v, (int, float)):
            return v
        return parse_omega(v)

    @field_validator("omega_list", mode="before")
    @classmethod
    def _parse_omega_list(cls, v: Any) -> Any:
        if v is None:
            return []
        if isinstance(v, str):
            return parse_omega_list(v)
        return [parse_omega(w) if isinstance(w, str) else w for w in v]

    @field_validator("N_list", mode="before")
    @classmethod
    def _parse_n_list(cls, v: Any) -> Any:
        if v is None:
            return []
        return parse_int_list(v) if isinstance(v, str) else v

    @field_validator("problem")
    @classmethod
    def _known_problem(cls, v: str) -> str:
        if v not in problem_names():
            raise ValueError(f"unknown problem {v!r}; choose one of {problem_names()}")
        return v

    @model_validator(mode="after")
    def _required_per_command(self) -> "RunConfig":
        needs = {
            "run": ("N", "omega"),
            "reference": ("omega",),
            "avg-check": ("omega",),
            "timing": ("N", "omega"),
        }
        missing = [name for name in needs.get(self.command, ()) if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.command} requires {', '.join('--' + m.replace('_', '-') for m in missing)}")
        if self.command == "table" and self.preset is None and not (self.N_list and self.omega_list):
            raise ValueError("table requires --preset or both --N and --omega")
        if self.command == "ratios" and self.preset is None and self.csv_in is None:
            raise ValueError("ratios requires --preset or --from-csv")
        return self
