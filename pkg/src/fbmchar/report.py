"""Report documents and file formats.

Path CSV: header ``path_id,t,value``, one row per grid point per path, values
with 17 significant digits (lossless for float64).

Report JSON: deterministic field ordering, schema version field, floats via
the shortest lossless representation.  Wall-clock timings never enter the
primary report (identical runs must produce byte-identical files); they are
written to a ``<out>.timings.json`` sidecar instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .grid import TimeGrid

SCHEMA_VERSION = "1"

__all__ = [
    "SCHEMA_VERSION",
    "ReportDocument",
    "emit_report",
    "read_report",
    "write_paths_csv",
    "read_paths_csv",
]

PATH_CSV_COLUMNS = ["path_id", "t", "value"]


def write_paths_csv(matrix, grid: TimeGrid, destination):
    """Write stacked paths to CSV in the shared `path_id,t,value` format."""
    X = np.asarray(matrix, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != grid.n_steps + 1:
        raise ValueError("matrix width must equal n_steps + 1")
    n_paths, width = X.shape
    frame = pd.DataFrame(
        {
            "path_id": np.repeat(np.arange(n_paths), width),
            "t": np.tile(grid.points, n_paths),
            "value": X.ravel(),
        }
    )
    frame.to_csv(destination, index=False, float_format="%.17g")


def read_paths_csv(source):
    """Read a `path_id,t,value` CSV back into (matrix, TimeGrid)."""
    try:
        frame = pd.read_csv(source, float_precision="round_trip")
    except OSError as exc:
        raise ValueError(f"cannot read path CSV {source}: {exc}") from exc
    if list(frame.columns) != PATH_CSV_COLUMNS:
        raise ValueError(
            f"path CSV must have columns {PATH_CSV_COLUMNS}, got {list(frame.columns)}"
        )
    ids = frame["path_id"].to_numpy()
    unique_ids = np.unique(ids)
    counts = frame.groupby("path_id", sort=True).size().to_numpy()
    if counts.min() != counts.max():
        raise ValueError("every path must be sampled on the same grid")
    width = int(counts[0])
    if width < 2:
        raise ValueError("paths need at least two grid points")
    n_paths = unique_ids.size
    order = np.argsort(ids, kind="stable")
    t = frame["t"].to_numpy()[order].reshape(n_paths, width)
    values = frame["value"].to_numpy()[order].reshape(n_paths, width)
    horizon = float(t[0, -1])
    if horizon <= 0:
        raise ValueError("path horizon must be positive")
    grid = TimeGrid(horizon, width - 1)
    if not np.allclose(t, grid.points[None, :], rtol=0, atol=1e-9 * max(horizon, 1)):
        raise ValueError("path CSV grid is not the shared uniform grid")
    return values, grid


@dataclass
class ReportDocument:
    """Config echo + results, plus wall-clock timings kept out of the report body."""

    config: dict
    results: dict
    schema_version: str = SCHEMA_VERSION
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "config": self.config,
            "results": self.results,
        }
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str, timings: dict | None = None) -> "ReportDocument":
        payload = json.loads(text)
        return cls(
            config=payload["config"],
            results=payload["results"],
            schema_version=payload["schema_version"],
            timings=dict(timings or {}),
        )


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_series_csv(path: Path, table: dict):
    columns = list(table)
    rows = zip(*(table[c] for c in columns))
    lines = [",".join(columns)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def emit_report(doc: ReportDocument, destination) -> list:
    """Write the report JSON plus plot-ready CSV series; return written paths.

    The primary JSON is deterministic for identical inputs; timings go to the
    ``.timings.json`` sidecar.  Every series under ``results['series']`` is
    written to ``<stem>.<name>.csv``.
    """
    destination = Path(destination)
    written = []
    try:
        destination.write_text(doc.to_json())
        written.append(destination)
        if doc.timings:
            sidecar = destination.with_name(destination.name + ".timings.json")
            sidecar.write_text(json.dumps(doc.timings, indent=2) + "\n")
            written.append(sidecar)
        for name, table in doc.results.get("series", {}).items():
            csv_path = destination.with_name(f"{destination.stem}.{name}.csv")
            _write_series_csv(csv_path, table)
            written.append(csv_path)
    except OSError as exc:
        raise ValueError(f"cannot write report to {destination}: {exc}") from exc
    return written


def read_report(source) -> ReportDocument:
    source = Path(source)
    text = source.read_text()
    sidecar = source.with_name(source.name + ".timings.json")
    timings = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return ReportDocument.from_json(text, timings)
