"""
Experiment harness: error tables, order diagnostics, complexity and timing
"""

from .analysis import (
    ComplexityReport,
    SuperconvergenceReport,
    TimingReport,
    column_ratios,
    complexity_probe,
    diagonal_ratios,
    euler_period_error,
    euler_superconvergence,
    loglog_slope,
    row_spread,
    timing_compare,
)
from .output import emit_csv, emit_plot_script, read_csv
from .sweep import (
    OMEGA_LISTS,
    CellResult,
    ErrorTable,
    ReferenceCache,
    SweepSpec,
    preset,
    reference_key,
    run_sweep,
    run_sweep_async,
)

__all__ = [
    "OMEGA_LISTS",
    "CellResult",
    "ComplexityReport",
    "ErrorTable",
    "ReferenceCache",
    "SuperconvergenceReport",
    "SweepSpec",
    "TimingReport",
    "column_ratios",
    "complexity_probe",
    "diagonal_ratios",
    "emit_csv",
    "emit_plot_script",
    "euler_period_error",
    "euler_superconvergence",
    "loglog_slope",
    "preset",
    "read_csv",
    "reference_key",
    "row_spread",
    "run_sweep",
    "run_sweep_async",
    "timing_compare",
]
