"""Plotting companion for the benchmark harness output files.

Reads only the documented CSV/JSON schemas from an experiment output
directory; shares no in-memory types with the library that produced them.
"""

from .errors import PlotError, SchemaError
from .figures import OPTIMIZER_COLORS, PLOT_KINDS, PlotJob, render
from .io import (
    MANIFEST_FILE,
    RUN_CSV_COLUMNS,
    SURROGATE_CSV_COLUMNS,
    load_experiment,
    read_manifest,
    read_run_csv,
    read_surrogate_csv,
)

__all__ = [
    "MANIFEST_FILE",
    "OPTIMIZER_COLORS",
    "PLOT_KINDS",
    "PlotError",
    "PlotJob",
    "RUN_CSV_COLUMNS",
    "SURROGATE_CSV_COLUMNS",
    "SchemaError",
    "load_experiment",
    "read_manifest",
    "read_run_csv",
    "read_surrogate_csv",
    "render",
]

__version__ = "0.1.0"
