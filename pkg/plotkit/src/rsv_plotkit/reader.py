"""Strict, schema-versioned reader for rsv run directories."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SUPPORTED_SCHEMA = 1

LEDGER_COLUMNS = [
    "t",
    "E_tilde",
    "E_star",
    "conservation_residual",
    "min_h",
    "max_h",
    "min_P_plus",
    "max_P_plus",
    "max_abs_P_minus",
    "Q_inf_norm",
    "M_t",
]

SNAPSHOT_COLUMNS = ["x", "eta", "u", "h", "P_plus", "P_minus", "Q"]


class SchemaError(ValueError):
    """Unknown schema version or malformed artifact."""


class MissingArtifact(FileNotFoundError):
    """A required artifact file is absent from the run directory."""


def _load_json(path: Path) -> dict:
    if not path.exists():
        raise MissingArtifact(str(path))
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    schema = data.get("schema")
    if schema != SUPPORTED_SCHEMA:
        raise SchemaError(
            f"{path.name}: schema {schema!r} not supported (expected {SUPPORTED_SCHEMA})"
        )
    return data


def _load_csv(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise MissingArtifact(str(path))
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path.name}: missing columns {missing}")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.size == 0:
        data = np.zeros((0, len(header)))
    if data.shape[1] != len(header):
        raise SchemaError(f"{path.name}: row width disagrees with header")
    return {name: data[:, j] for j, name in enumerate(header)}


class RunDir:
    """Lazy view of one run directory's artifacts."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.is_dir():
            raise MissingArtifact(f"{self.path} is not a directory")
        self.config = _load_json(self.path / "config.json")

    def verdict(self) -> dict:
        return _load_json(self.path / "verdict.json")

    def profile(self) -> dict:
        return _load_json(self.path / "profile.json")

    def has_profile(self) -> bool:
        return (self.path / "profile.json").exists()

    def ledger(self) -> dict[str, np.ndarray]:
        table = _load_csv(self.path / "ledger.csv", LEDGER_COLUMNS)
        t = table["t"]
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise SchemaError("ledger.csv: time column is not strictly increasing")
        return table

    def snapshot_times(self) -> list[tuple[float, Path]]:
        """(time, path) for every snapshot file present, by ledger row index."""
        table = self.ledger()
        out = []
        for i, t in enumerate(table["t"]):
            path = self.path / "snapshots" / f"snapshot_{i:06d}.csv"
            if path.exists():
                out.append((float(t), path))
        if not out:
            raise MissingArtifact(f"no snapshot files under {self.path}")
        return out

    def snapshot_nearest(self, t: float) -> dict[str, np.ndarray]:
        snaps = self.snapshot_times()
        _, path = min(snaps, key=lambda item: abs(item[0] - t))
        return _load_csv(path, SNAPSHOT_COLUMNS)
