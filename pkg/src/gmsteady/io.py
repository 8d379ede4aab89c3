"""CSV field export and deterministic JSON reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .mesh import Grid


def field_header(grid: Grid) -> list:
    return ["x", "value"] if grid.dimension == 1 else ["x", "y", "value"]


def write_field_csv(path, grid: Grid, values) -> Path:
    """Write ``x[,y],value`` rows in lexicographic node order."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.num_nodes,):
        raise ValueError(f"field has {values.size} values, grid has {grid.num_nodes} nodes")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(field_header(grid))
        for p, val in zip(grid.points, values):
            w.writerow([repr(float(c)) for c in p] + [repr(float(val))])
    return path


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(points, values)`` from a field CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, :-1], data[:, -1]


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_default, sort_keys=True, indent=2)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n")
    return path
