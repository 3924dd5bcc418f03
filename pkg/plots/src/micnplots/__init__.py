"""Figure rendering for the simulator's trace, summary, and sweep CSVs."""

from .figures import (SchemaError, read_summary, read_sweep, read_trace, render,
                      render_rank, render_sweep, render_traffic, save)

__version__ = "0.1.0"

__all__ = ["SchemaError", "read_summary", "read_sweep", "read_trace", "render",
           "render_rank", "render_sweep", "render_traffic", "save"]
