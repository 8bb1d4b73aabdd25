"""Offline figure generation from rsv run directories.

Strict consumer of the simulation artifacts: all annotated numbers are read
from the run directory's CSV/JSON files; nothing is recomputed.
"""

from .reader import RunDir, SchemaError, MissingArtifact
from .figures import plot_riccati, plot_profile, plot_ledger

__all__ = [
    "RunDir",
    "SchemaError",
    "MissingArtifact",
    "plot_riccati",
    "plot_profile",
    "plot_ledger",
]
