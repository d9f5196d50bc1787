"""
Subcommand implementations; each returns a JSON-serialisable summary
"""

import sys
from contextlib import contextmanager
from typing import IO, Any, Dict, Iterator, List, Optional

import numpy as np
import pandas as pd

from ..bench.analysis import column_ratios, diagonal_ratios, row_spread, timing_compare
from ..bench.output import FLOAT_FORMAT, emit_csv, emit_plot_script, read_csv
from ..bench.sweep import ErrorTable, SweepSpec, preset, run_sweep
from ..config import get_config
from ..core.averaging import (
    averaged_rhs_phase1,
    averaged_rhs_phase2,
    check_h1,
    check_h2,
    trapezoid_average,
)
from ..core.refsolve import SolverConfig, solve_averaged, solve_oscillatory
from ..core.sam import SamOptions, sam_solve
from ..error_handling import ConfigValidationError, VerificationFailed
from ..models.grid import make_grid
from ..problems.gene import averaged_hill
from ..problems.registry import ProblemBundle, get_problem
from ..utils.logging import get_sam_logger
from ..utils.metrics import metrics
from .models import RunConfig

logger = get_sam_logger(__name__)

# Max deviation allowed between the Fourier evaluator and a hand-derived averaged rhs
AVG_CHECK_TOLERANCE = 1e-8


@contextmanager
def _output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _write_frame(frame: pd.DataFrame, path: Optional[str]) -> None:
    with _output(path) as fh:
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _state_frame(times: np.ndarray, states: np.ndarray, prefix: str) -> pd.DataFrame:
    frame = pd.DataFrame(states, columns=[f"{prefix}_{i + 1}" for i in range(states.shape[1])])
    frame.insert(0, "t", times)
    return frame


def cmd_run(cfg: RunConfig) -> Dict[str, Any]:
    """SAM on one grid; writes t,X_1..X_D at the step points."""
    bundle = get_problem(cfg.problem, cfg.omega, cfg.overrides)
    osc = bundle.oscillatory
    nu_max = cfg.nu_max or (cfg.c or bundle.default_c) * cfg.N
    grid = make_grid(cfg.N, nu_max, cfg.omega, osc.delay)
    done = metrics.timer("cli.run")
    sol = sam_solve(osc, grid, SamOptions(forward_only=cfg.forward_only), t_max=cfg.t_max)
    wall = done()
    _write_frame(_state_frame(sol.times, sol.states, "X"), cfg.out)
    return {
        "problem": bundle.name,
        "N": cfg.N,
        "nu_max": nu_max,
        "Omega": cfg.omega,
        "steps": int(sol.M),
        "evals": sol.eval_count,
        "wall_ms": round(wall * 1e3, 3),
    }


def cmd_reference(cfg: RunConfig) -> Dict[str, Any]:
    """Dense reference on a uniform mesh; t,x_1..x_D."""
    bundle = get_problem(cfg.problem, cfg.omega, cfg.overrides)
    solver = SolverConfig.from_config()
    if cfg.reference == "oscillatory":
        t_end = cfg.t_max or bundle.oscillatory.t_max
        sol = solve_oscillatory(bundle.oscillatory, solver, omega=cfg.omega, t_end=t_end)
    else:
        t_end = cfg.t_max or bundle.averaged.t_max
        sol = solve_averaged(bundle.averaged, solver, t_end=t_end)
    ts = np.linspace(0.0, t_end, cfg.points)
    _write_frame(_state_frame(ts, sol.eval_many(ts), "x"), cfg.out)
    return {
        "problem": bundle.name,
        "kind": cfg.reference,
        "Omega": cfg.omega,
        "accepted": sol.n_accepted,
        "rejected": sol.n_rejected,
        "evals": sol.n_evals,
    }


def _sweep_spec(cfg: RunConfig) -> SweepSpec:
    if cfg.preset is not None:
        spec = preset(cfg.preset)
        given = cfg.model_fields_set
        if "problem" in given and cfg.problem != spec.problem:
            raise ConfigValidationError(
                "problem", cfg.problem, f"preset {spec.name} sweeps {spec.problem}; drop --problem or --preset"
            )
        changes: Dict[str, Any] = {}
        if "reference" in given:
            changes["reference"] = cfg.reference
        if cfg.N_list:
            changes["N_list"] = tuple(cfg.N_list)
        if cfg.omega_list:
            changes["Omega_list"] = tuple(cfg.omega_list)
        if cfg.overrides:
            changes["overrides"] = dict(cfg.overrides)
        if cfg.t_max is not None:
            changes["t_max"] = cfg.t_max
        if cfg.c is not None:
            changes["c"] = cfg.c
        return spec.with_overrides(**changes) if changes else spec
    return SweepSpec(
        problem=cfg.problem,
        N_list=tuple(cfg.N_list),
        Omega_list=tuple(cfg.omega_list),
        reference=cfg.reference,
        c=cfg.c,
        t_max=cfg.t_max or 2.0,
        overrides=dict(cfg.overrides),
    )


def _table_summary(table: ErrorTable) -> Dict[str, Any]:
    populated = [c for c in table.rows() if not c.excluded]
    return {
        "rows": len(table.N_list),
        "columns": len(table.Omega_list),
        "populated": len(populated),
        "excluded": len(table.cells) - len(populated),
    }


def cmd_table(cfg: RunConfig) -> Dict[str, Any]:
    spec = _sweep_spec(cfg)
    table = run_sweep(spec)
    with _output(cfg.out) as fh:
        emit_csv(table, fh)
    summary = {"spec": spec.name, "problem": spec.problem, "reference": spec.reference, **_table_summary(table)}
    counts = metrics.get_metrics()
    summary["references_solved"] = counts.get("sweep.references_solved", 0)
    summary["sweep_ms"] = round(counts.get("sweep.total", 0.0) * 1e3, 3)
    if cfg.plot:
        csv_name = cfg.out if cfg.out and cfg.out != "-" else "errors.csv"
        summary["plot"] = str(emit_plot_script(table, cfg.plot, csv_name))
    return summary


def _finite(values: List[float]) -> List[Optional[float]]:
    return [None if np.isnan(v) else round(float(v), 4) for v in values]


def cmd_ratios(cfg: RunConfig) -> Dict[str, Any]:
    table = read_csv(cfg.csv_in) if cfg.csv_in else run_sweep(_sweep_spec(cfg))
    diag = diagonal_ratios(table)
    col = column_ratios(table)
    spread = row_spread(table)
    rows = [{"kind": "diagonal", "index": i, "ratio": r} for i, r in enumerate(diag)]
    rows += [{"kind": "column", "index": i, "ratio": r} for i, r in enumerate(col)]
    rows += [{"kind": "row_spread", "index": i, "ratio": r} for i, r in enumerate(spread)]
    _write_frame(pd.DataFrame(rows, columns=["kind", "index", "ratio"]), cfg.out)
    return {"diagonal": _finite(diag), "column": _finite(col), "row_spread": _finite(spread)}


def _probe(rng: np.random.Generator, center: np.ndarray) -> np.ndarray:
    return center + 0.25 * np.maximum(1.0, np.abs(center)) * rng.uniform(-1.0, 1.0, center.shape)


def _fourier_deviation(bundle: ProblemBundle, Omega: float, samples: int, rng: np.random.Generator) -> float:
    """Max |Fourier evaluator - hand-derived phase rhs| over random states and times."""
    fourier, averaged = bundle.fourier, bundle.averaged
    tau, dim = averaged.delay, averaged.dim
    center = averaged.history(0.0)
    worst = 0.0
    for _ in range(samples):
        X, Y, Z = _probe(rng, center), _probe(rng, center), _probe(rng, center)
        t1 = float(rng.uniform(0.0, tau))
        t2 = float(rng.uniform(tau, averaged.t_max))
        # slow time rides along as an extra component when the Fourier form is augmented
        extra = fourier.dim - dim
        aug = (lambda v, s: np.concatenate([v, [s]])) if extra else (lambda v, s: v)
        dphi = fourier.history.derivative(t1 - tau)
        got1 = averaged_rhs_phase1(fourier, aug(X, t1), aug(Y, t1 - tau), dphi, t1, Omega).value[:dim]
        want1 = averaged.rhs_phase1(X, Y, averaged.history.derivative(t1 - tau), t1, Omega)
        got2 = averaged_rhs_phase2(fourier, aug(X, t2), aug(Y, t2 - tau), aug(Z, t2 - 2 * tau), Omega).value[:dim]
        want2 = averaged.rhs_phase2(X, Y, Z, t2, Omega)
        worst = max(worst, float(np.max(np.abs(got1 - want1))), float(np.max(np.abs(got2 - want2))))
    return worst


def _gene_deviation(bundle: ProblemBundle, Omega: float, samples: int, rng: np.random.Generator) -> float:
    """Closed-form averaged second component against the quadrature average of the transformed rhs."""
    pair = bundle.gene
    center = bundle.averaged.history(0.0)
    worst = 0.0
    for _ in range(samples):
        X, Y = _probe(rng, center), _probe(rng, center)
        t = float(rng.uniform(0.0, bundle.averaged.t_max))
        quad = trapezoid_average(lambda th: pair.transformed_rhs(X, Y, t, th, Omega), n=64)[1]
        closed = averaged_hill(pair.params, float(X[0])) - Y[1]
        worst = max(worst, abs(quad - closed))
    return worst


def cmd_avg_check(cfg: RunConfig) -> Dict[str, Any]:
    bundle = get_problem(cfg.problem, cfg.omega, cfg.overrides)
    rng = np.random.default_rng(get_config().seed if cfg.seed is None else cfg.seed)
    if bundle.fourier is not None:
        deviation = _fourier_deviation(bundle, cfg.omega, cfg.samples, rng)
        h1: Optional[bool] = check_h1(bundle.fourier, rng)
        check = "fourier-vs-hand-derived"
    else:
        deviation = _gene_deviation(bundle, cfg.omega, cfg.samples, rng)
        h1 = None
        check = "closed-form-vs-quadrature"
    h2 = check_h2(bundle.oscillatory.delay, cfg.omega)
    summary = {"problem": bundle.name, "Omega": cfg.omega, "check": check, "max_deviation": deviation, "H1": h1, "H2": h2}
    with _output(cfg.out) as fh:
        pd.DataFrame([summary]).to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if deviation > AVG_CHECK_TOLERANCE:
        raise VerificationFailed(check, deviation, AVG_CHECK_TOLERANCE).annotate(problem=bundle.name, Omega=cfg.omega)
    return summary


def cmd_timing(cfg: RunConfig) -> Dict[str, Any]:
    report = timing_compare(cfg.problem, cfg.omega, cfg.N, tol=cfg.tol, repeats=cfg.repeats, c=cfg.c)
    row = {
        "problem": cfg.problem,
        "Omega": report.Omega,
        "N": report.N,
        "sam_s": report.sam_seconds,
        "reference_s": report.reference_seconds,
        "speedup": report.speedup,
    }
    with _output(cfg.out) as fh:
        pd.DataFrame([row]).to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return row


COMMANDS = {
    "run": cmd_run,
    "reference": cmd_reference,
    "table": cmd_table,
    "ratios": cmd_ratios,
    "avg-check": cmd_avg_check,
    "timing": cmd_timing,
}
