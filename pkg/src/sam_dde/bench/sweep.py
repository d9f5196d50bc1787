"""
Error sweeps over (N, Omega) against cached reference solutions
"""

import asyncio
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..config import get_config
from ..core.refsolve import SolverConfig, solve_averaged, solve_oscillatory
from ..core.sam import SamOptions, sam_solve
from ..error_handling import ConfigValidationError, NonStroboscopicComparison, SamError
from ..models.grid import GridParams, is_feasible
from ..models.solution import DenseSolution, max_step_point_error
from ..problems.registry import ProblemBundle, get_problem
from ..utils.cache import LRUCache
from ..utils.logging import get_sam_logger
from ..utils.metrics import metrics
from ..utils.paths import get_reference_cache_dir

logger = get_sam_logger(__name__)

REFERENCE_KINDS = ("averaged", "oscillatory")

_PI = math.pi
OMEGA_LISTS: Dict[str, Tuple[float, ...]] = {
    "tab4": tuple(25.0 * 2**j for j in range(8)),
    "tab2": tuple(8.0 * _PI * 2**j for j in range(8)),
    "tab3": tuple(8.0 * _PI * 2**j for j in range(5)),
    "h2": tuple(8.0 * _PI * 2**j for j in range(7)),
    "noh2": tuple((8.0 * _PI + _PI / 64.0) * 2**j for j in range(7)),
    "gene": tuple(8.0 * _PI * 2**j for j in range(8)),
}


def _powers_of_two(upper: int) -> Tuple[int, ...]:
    return tuple(2**j for j in range(int(math.log2(upper)) + 1))


@dataclass(frozen=True)
class SweepSpec:
    """One error table: rows N, columns Omega, nu_max = c N (h = T / (c N))."""

    problem: str
    N_list: Tuple[int, ...]
    Omega_list: Tuple[float, ...]
    reference: str = "averaged"
    c: Optional[int] = None
    error_component: Optional[int] = None
    t_max: float = 2.0
    overrides: Mapping[str, Any] = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "N_list", tuple(int(n) for n in self.N_list))
        object.__setattr__(self, "Omega_list", tuple(float(w) for w in self.Omega_list))
        for label, values in (("N_list", self.N_list), ("Omega_list", self.Omega_list)):
            if not values:
                raise ConfigValidationError(label, values, "must be nonempty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ConfigValidationError(label, values, "must be strictly ascending")
        if self.reference not in REFERENCE_KINDS:
            raise ConfigValidationError("reference", self.reference, f"must be one of {REFERENCE_KINDS}")
        if self.c is not None and self.c < 1:
            raise ConfigValidationError("c", self.c, "must be >= 1")
        if self.t_max <= 0:
            raise ConfigValidationError("t_max", self.t_max, "must be > 0")

    def nu_max(self, N: int, bundle: ProblemBundle) -> int:
        return (self.c or bundle.default_c) * N

    def component(self, bundle: ProblemBundle) -> int:
        return bundle.error_component if self.error_component is None else self.error_component

    def with_overrides(self, **changes: Any) -> "SweepSpec":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return SweepSpec(**values)


def preset(name: str) -> SweepSpec:
    """Built-in sweeps: toggle (tab4, tab2, tab3), newpro (h2, noh2) and toggle-gene."""
    presets = {
        "tab4": lambda: SweepSpec("toggle", _powers_of_two(128), OMEGA_LISTS["tab4"], name="tab4"),
        "tab2": lambda: SweepSpec("toggle", _powers_of_two(128), OMEGA_LISTS["tab2"], name="tab2"),
        "tab3": lambda: SweepSpec(
            "toggle", _powers_of_two(16), OMEGA_LISTS["tab3"], reference="oscillatory", name="tab3"
        ),
        "h2": lambda: SweepSpec("newpro", _powers_of_two(64), OMEGA_LISTS["h2"], name="h2"),
        "noh2": lambda: SweepSpec("newpro", _powers_of_two(64), OMEGA_LISTS["noh2"], name="noh2"),
        "gene": lambda: SweepSpec("toggle-gene", _powers_of_two(128), OMEGA_LISTS["gene"], name="gene"),
    }
    try:
        return presets[name]()
    except KeyError:
        raise ConfigValidationError("preset", name, f"unknown sweep preset; choose one of {sorted(presets)}") from None


@dataclass(frozen=True)
class CellResult:
    N: int
    Omega: float
    error: Optional[float]
    excluded: bool
    evals: int = 0
    wall_ms: float = 0.0


@dataclass
class ErrorTable:
    N_list: Tuple[int, ...]
    Omega_list: Tuple[float, ...]
    cells: Dict[Tuple[int, float], CellResult]
    spec: Optional[SweepSpec] = None

    def cell(self, N: int, Omega: float) -> CellResult:
        return self.cells[(int(N), float(Omega))]

    def error(self, N: int, Omega: float) -> Optional[float]:
        return self.cell(N, Omega).error

    def rows(self) -> List[CellResult]:
        """Cells in row-major order (N outer, Omega inner)."""
        return [self.cells[(n, w)] for n in self.N_list for w in self.Omega_list]

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "N": c.N,
                    "Omega": c.Omega,
                    "error": np.nan if c.error is None else c.error,
                    "excluded": int(c.excluded),
                    "evals": c.evals,
                    "wall_ms": c.wall_ms,
                }
                for c in self.rows()
            ],
            columns=["N", "Omega", "error", "excluded", "evals", "wall_ms"],
        )

    def pivot(self) -> pd.DataFrame:
        """Errors with rows N and columns Omega; excluded cells are NaN."""
        return self.as_frame().pivot(index="N", columns="Omega", values="error")

    def diagonal(self) -> List[CellResult]:
        return [self.cells[(n, w)] for n, w in zip(self.N_list, self.Omega_list)]

    def column(self, Omega: float) -> List[CellResult]:
        return [self.cells[(n, float(Omega))] for n in self.N_list]


def reference_key(bundle: ProblemBundle, spec: SweepSpec, Omega: float, solver: SolverConfig) -> str:
    """SHA-256 over everything that determines a reference trajectory."""
    payload = {
        "problem": bundle.name,
        "overrides": {k: spec.overrides[k] for k in sorted(spec.overrides)},
        "Omega": repr(float(Omega)),
        "kind": spec.reference,
        "t_max": repr(float(spec.t_max)),
        "rel_tol": solver.rel_tol,
        "abs_tol": solver.abs_tol,
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


class ReferenceCache(LRUCache):
    """In-memory LRU of dense references with optional .npz files on disk."""

    def __init__(
        self,
        max_size: Optional[int] = None,
        persist: Optional[bool] = None,
        cache_dir: Optional[str] = None,
    ):
        bench = get_config().bench
        super().__init__(max_size=max_size or bench.cache_size)
        self.persist = bench.persist_references if persist is None else persist
        self._dir_override = cache_dir if cache_dir is not None else (bench.cache_dir or None)

    def _path(self, key: str) -> Path:
        return get_reference_cache_dir(self._dir_override) / f"{key}.npz"

    def load(self, key: str, history) -> Optional[DenseSolution]:
        hit = self.get(key)
        if hit is not None or not self.persist:
            return hit
        path = self._path(key)
        if not path.exists():
            logger.warning("reference not on disk", key=key[:12], path=str(path))
            return None
        with np.load(path) as data:
            sol = DenseSolution.from_arrays({k: data[k] for k in data.files}, history)
        self.set(key, sol)
        return sol

    def store(self, key: str, solution: DenseSolution) -> None:
        self.set(key, solution)
        if self.persist:
            np.savez(self._path(key), **solution.to_arrays())


def _solve_reference(bundle: ProblemBundle, spec: SweepSpec, Omega: float, solver: SolverConfig) -> DenseSolution:
    if spec.reference == "oscillatory":
        return solve_oscillatory(bundle.oscillatory, solver, omega=Omega, t_end=spec.t_max)
    return solve_averaged(bundle.averaged, solver, t_end=spec.t_max)


def _run_cell(bundle: ProblemBundle, spec: SweepSpec, N: int, Omega: float, reference: DenseSolution) -> CellResult:
    grid = GridParams(N=N, nu_max=spec.nu_max(N, bundle), Omega=Omega, tau=bundle.oscillatory.delay)
    done = metrics.timer("sweep.cell")
    try:
        sol = sam_solve(bundle.oscillatory, grid, SamOptions(), t_max=spec.t_max)
    except SamError as e:
        raise e.annotate(N=N, Omega=Omega, problem=bundle.name)
    wall = done()
    err = max_step_point_error(sol, reference, spec.component(bundle))
    logger.debug("cell done", N=N, Omega=Omega, error=err, evals=sol.eval_count)
    return CellResult(N=N, Omega=Omega, error=err, excluded=False, evals=sol.eval_count, wall_ms=wall * 1e3)


def _feasible_cells(spec: SweepSpec, tau: float) -> List[Tuple[int, float]]:
    grid_cfg = get_config().grid
    return [
        (n, w)
        for n in spec.N_list
        for w in spec.Omega_list
        if is_feasible(n, w, tau, grid_cfg.feasibility_ratio, grid_cfg.feasibility_slack)
    ]


def _check_stroboscopic(spec: SweepSpec, cells: Sequence[Tuple[int, float]], tau: float) -> None:
    if spec.reference != "oscillatory":
        return
    for n, w in cells:
        grid = GridParams(N=n, nu_max=1, Omega=w, tau=tau)
        if not grid.is_stroboscopic():
            raise NonStroboscopicComparison(n, w, grid.periods_per_step)


async def _batched(calls: Sequence, max_workers: int) -> List[Any]:
    """Run blocking callables in worker threads, at most max_workers at a time, preserving order."""
    results: List[Any] = []
    for start in range(0, len(calls), max_workers):
        batch = calls[start : start + max_workers]
        results.extend(await asyncio.gather(*(asyncio.to_thread(fn, *args) for fn, *args in batch)))
    return results


async def run_sweep_async(
    spec: SweepSpec, cache: Optional[ReferenceCache] = None, max_workers: Optional[int] = None
) -> ErrorTable:
    cfg = get_config()
    workers = max_workers or cfg.bench.max_workers
    cache = cache if cache is not None else ReferenceCache()
    solver = SolverConfig.from_config(cfg)

    bundles = {w: get_problem(spec.problem, w, spec.overrides) for w in spec.Omega_list}
    tau = bundles[spec.Omega_list[0]].oscillatory.delay
    feasible = _feasible_cells(spec, tau)
    _check_stroboscopic(spec, feasible, tau)

    needed = sorted({w for _, w in feasible})
    keys = {w: reference_key(bundles[w], spec, w, solver) for w in needed}
    references: Dict[float, DenseSolution] = {}
    missing = []
    for w in needed:
        history = bundles[w].averaged.history if spec.reference == "averaged" else bundles[w].oscillatory.history
        hit = cache.load(keys[w], history)
        if hit is None:
            missing.append(w)
        else:
            references[w] = hit
    stats = cache.get_stats()
    logger.info(
        "sweep references",
        spec=spec.name,
        cached=len(references),
        to_solve=len(missing),
        cache_size=stats["size"],
        hit_rate=round(stats["hit_rate"], 3),
    )
    solved = await _batched([(_solve_reference, bundles[w], spec, w, solver) for w in missing], workers)
    for w, sol in zip(missing, solved):
        cache.store(keys[w], sol)
        references[w] = sol

    done = metrics.timer("sweep.total")
    results = await _batched(
        [(_run_cell, bundles[w], spec, n, w, references[w]) for n, w in feasible], workers
    )
    cells: Dict[Tuple[int, float], CellResult] = {
        (n, w): CellResult(n, w, None, True) for n in spec.N_list for w in spec.Omega_list
    }
    for r in results:
        cells[(r.N, r.Omega)] = r
    metrics.increment("sweep.references_solved", len(missing))
    logger.info(
        "sweep finished",
        spec=spec.name,
        cells=len(cells),
        populated=len(results),
        wall_ms=round(done() * 1e3, 3),
    )
    return ErrorTable(N_list=spec.N_list, Omega_list=spec.Omega_list, cells=cells, spec=spec)


def run_sweep(
    spec: SweepSpec, cache: Optional[ReferenceCache] = None, max_workers: Optional[int] = None
) -> ErrorTable:
    """Fill an ErrorTable: one SAM run per feasible cell, max step-point error on one component."""
    return asyncio.run(run_sweep_async(spec, cache=cache, max_workers=max_workers))
