"""Figure rendering for UAV mobility-management run artifacts."""

from .cli import sample_path
from .figures import (
    plot_comparison,
    plot_convergence,
    plot_trajectories,
    rolling_mean,
)
from .io import SchemaError, read_compare_table, read_trace, read_training_log

__all__ = [
    "SchemaError",
    "plot_comparison",
    "plot_convergence",
    "plot_trajectories",
    "read_compare_table",
    "read_trace",
    "read_training_log",
    "rolling_mean",
    "sample_path",
]
