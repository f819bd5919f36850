"""Delimited snapshot files and the flat run manifest.

Snapshots are CSV with header x[,y],rho,xi,theta,mu,margin, one node per row
(x-major in 2D), every float serialized with 17 significant digits so a
write/read round trip is bit-exact. Files are named t_<index>_<time>.csv by
global step index. The manifest is the same flat `key = value` text the
config uses.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField
from .model import ModelParams
from .state import SystemState
from .temperature import pointwise_margin

__all__ = [
    "fmt17",
    "snapshot_name",
    "parse_snapshot_name",
    "write_snapshot",
    "read_snapshot",
    "write_field_csv",
    "read_field_csv",
    "write_manifest",
    "read_manifest",
    "list_snapshots",
]


def fmt17(x: float) -> str:
    return f"{float(x):.17g}"


def snapshot_name(index: int, time: float) -> str:
    return f"t_{index:06d}_{time:.10g}.csv"


def parse_snapshot_name(name: str):
    stem = name[:-4] if name.endswith(".csv") else name
    head, idx, time = stem.split("_", 2)
    if head != "t":
        raise ValueError(f"not a snapshot file name: {name!r}")
    return int(idx), float(time)


def _coordinate_columns(grid: Grid):
    if grid.dim == 1:
        (x,) = grid.coords()
        return ["x"], [x.ravel()]
    x, y = grid.coords()
    return ["x", "y"], [x.ravel(), y.ravel()]


def write_snapshot(path, state: SystemState, params: ModelParams) -> Path:
    path = Path(path)
    grid = state.grid
    names, coords = _coordinate_columns(grid)
    mu = state.mu().values.ravel()
    margin = pointwise_margin(state.rho.values, state.xi.values, params).ravel()
    cols = coords + [
        state.rho.values.ravel(),
        state.xi.values.ravel(),
        state.theta.values.ravel(),
        mu,
        margin,
    ]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["rho", "xi", "theta", "mu", "margin"])
        for row in zip(*cols):
            writer.writerow([fmt17(v) for v in row])
    return path


def _grid_from_coords(columns: dict) -> Grid:
    if "y" in columns:
        n = int(round(np.sqrt(len(columns["x"]))))
        grid = Grid(dim=2, n=n)
    else:
        grid = Grid(dim=1, n=len(columns["x"]))
    names, coords = _coordinate_columns(grid)
    for name, ref in zip(names, coords):
        got = np.asarray(columns[name])
        if got.shape != ref.shape or np.max(np.abs(got - ref)) > 1e-12:
            raise ValueError("snapshot coordinates do not form a uniform unit-domain grid")
    return grid


def _read_csv_columns(path) -> dict:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    data = np.array([[float(v) for v in row] for row in rows])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: malformed delimited file")
    return {name: data[:, k] for k, name in enumerate(header)}


def read_snapshot(path):
    """Returns (grid, dict of fields rho/xi/theta/mu/margin as shaped arrays)."""
    columns = _read_csv_columns(path)
    for required in ("x", "rho", "xi", "theta"):
        if required not in columns:
            raise ValueError(f"{path}: snapshot is missing column {required!r}")
    grid = _grid_from_coords(columns)
    out = {}
    for name in ("rho", "xi", "theta", "mu", "margin"):
        if name in columns:
            out[name] = columns[name].reshape(grid.shape)
    return grid, out


def write_field_csv(path, field: ScalarField, name: str = "value") -> Path:
    path = Path(path)
    names, coords = _coordinate_columns(field.grid)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + [name])
        for row in zip(*coords, field.values.ravel()):
            writer.writerow([fmt17(v) for v in row])
    return path


def read_field_csv(path) -> ScalarField:
    columns = _read_csv_columns(path)
    grid = _grid_from_coords(columns)
    names = {"x", "y"}
    value_cols = [k for k in columns if k not in names]
    if len(value_cols) != 1:
        raise ValueError(f"{path}: expected exactly one value column, found {value_cols}")
    return ScalarField(grid, columns[value_cols[0]].reshape(grid.shape))


def _format_manifest_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt17(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_manifest(path, mapping: dict) -> Path:
    path = Path(path)
    lines = [f"{k} = {_format_manifest_value(v)}" for k, v in mapping.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        key, _, value = body.partition("=")
        out[key.strip()] = value.strip()
    return out


def list_snapshots(rundir) -> list:
    """Sorted (index, time, path) triples for every snapshot in a run directory."""
    found = []
    for p in Path(rundir).glob("t_*.csv"):
        try:
            idx, time = parse_snapshot_name(p.name)
        except ValueError:
            continue
        found.append((idx, time, p))
    found.sort(key=lambda triple: triple[0])
    return found
