"""
CSV and gnuplot output for error tables
"""

import math
from pathlib import Path
from typing import IO, Dict, Tuple, Union

import pandas as pd
from jinja2 import Environment, PackageLoader, StrictUndefined

from .sweep import CellResult, ErrorTable

CSV_COLUMNS = ["N", "Omega", "error", "excluded", "evals", "wall_ms"]
FLOAT_FORMAT = "%.6e"

PathOrBuffer = Union[str, Path, IO[str]]


def emit_csv(table: ErrorTable, path: PathOrBuffer) -> None:
    """One row per cell; excluded cells have an empty error and excluded=1."""
    frame = table.as_frame()[CSV_COLUMNS]
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def read_csv(path: PathOrBuffer) -> ErrorTable:
    frame = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"not an error table, missing columns {missing}")
    cells: Dict[Tuple[int, float], CellResult] = {}
    for row in frame.itertuples(index=False):
        error = None if pd.isna(row.error) else float(row.error)
        key = (int(row.N), float(row.Omega))
        cells[key] = CellResult(
            N=key[0],
            Omega=key[1],
            error=error,
            excluded=bool(row.excluded),
            evals=int(row.evals),
            wall_ms=float(row.wall_ms),
        )
    N_list = tuple(sorted({n for n, _ in cells}))
    Omega_list = tuple(sorted({w for _, w in cells}))
    return ErrorTable(N_list=N_list, Omega_list=Omega_list, cells=cells)


def _environment() -> Environment:
    return Environment(
        loader=PackageLoader("sam_dde", "templates"),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
    )


def _omega_label(Omega: float) -> str:
    k = Omega / math.pi
    return f"{k:g}pi" if abs(k - round(k)) < 1e-9 else f"{Omega:g}"


def emit_plot_script(table: ErrorTable, path: Union[str, Path], csv_name: str, title: str = "") -> Path:
    """gnuplot script plotting error against N per Omega column, with an N^-2 guide line."""
    populated = [c for c in table.rows() if not c.excluded and c.error is not None]
    anchor = max(populated, key=lambda c: c.error) if populated else None
    series = [
        {"Omega": repr(w), "label": _omega_label(w)}
        for w in table.Omega_list
        if any(c.Omega == w for c in populated)
    ]
    text = _environment().get_template("plot_errors.gp.j2").render(
        csv_name=csv_name,
        title=title or (table.spec.name if table.spec else "SAM errors"),
        series=series,
        anchor_N=anchor.N if anchor else 1,
        anchor_error=repr(anchor.error) if anchor else "1.0",
    )
    out = Path(path)
    out.write_text(text)
    return out
