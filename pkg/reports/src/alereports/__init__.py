"""Batch figure generation from simulation CSV outputs.

Three figure kinds, each a pure function of already-computed CSV files:
boundary polylines, per-mode variance reports, and convergence sweeps.
Nothing is recomputed here; the CSVs are the single source of truth.
"""

from .schemas import SchemaError, read_report, read_sweep, read_trace
from .figures import apply_style, plot_boundary, plot_sweep, plot_variance

__version__ = "0.1.0"

__all__ = ["SchemaError", "read_trace", "read_report", "read_sweep",
           "apply_style", "plot_boundary", "plot_variance", "plot_sweep"]
