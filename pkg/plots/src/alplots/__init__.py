"""Figure rendering for the AL lattice ROM pipeline CSVs."""

from .figures import FigureSpec, SchemaError, fitted_log_slope, render

__all__ = ["FigureSpec", "SchemaError", "fitted_log_slope", "render"]
