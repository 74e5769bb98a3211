"""CSV dataset ingestion, invalid-sample handling, and results serialization.

Schemas:
  points.csv     header ``id,x,y[,z...]``
  signal.csv     header ``id,value``; the literal ``NA`` marks an invalid
                 sample (kept, flagged, and filled later by interpolation)
  distances.csv  square matrix: header ``id,<id_1>,...,<id_n>``, one row
                 per node starting with its id
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    InterpolationFailureError,
    InvalidInputError,
    InvalidParameterError,
    ParseError,
    SchemaError,
)
from .graphs import Graph
from .solver import Observation

NA_TOKEN = "NA"


@dataclass(frozen=True)
class Dataset:
    """Loaded node data: a signal plus coordinates and/or a distance matrix."""

    signal: np.ndarray
    valid: np.ndarray
    coords: np.ndarray | None = None
    distances: np.ndarray | None = None
    node_labels: tuple | None = None

    def __post_init__(self):
        signal = np.asarray(self.signal, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        if signal.ndim != 1 or valid.shape != signal.shape:
            raise InvalidInputError("signal and validity flags must be equal-length vectors")
        if self.coords is None and self.distances is None:
            raise InvalidInputError("dataset needs coordinates or a distance matrix")
        if self.coords is not None and np.asarray(self.coords).shape[0] != signal.size:
            raise InvalidInputError("coords row count does not match the signal")
        if self.distances is not None and np.asarray(self.distances).shape != (signal.size, signal.size):
            raise InvalidInputError("distance matrix shape does not match the signal")
        object.__setattr__(self, "signal", signal)
        object.__setattr__(self, "valid", valid)

    @property
    def n(self) -> int:
        return self.signal.size


class OutlierMode(Enum):
    MASK = "mask"
    INTERPOLATE = "interpolate"


def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise SchemaError(f"{path}: file not found")
    if not rows:
        raise SchemaError(f"{path}: empty file")
    return rows[0], rows[1:]


def _parse_float(cell, path, line, column):
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}: non-numeric value {cell!r} at row {line}, column {column!r}")


def _load_points(path):
    header, rows = _read_rows(path)
    if len(header) < 3:
        raise SchemaError(f"{path}: points need an id and at least two coordinate columns")
    ids, coords = [], []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        ids.append(row[0])
        coords.append([_parse_float(c, path, i + 2, header[j + 1])
                       for j, c in enumerate(row[1:])])
    return ids, np.asarray(coords, dtype=float)


def _load_signal(path):
    header, rows = _read_rows(path)
    if len(header) != 2:
        raise SchemaError(f"{path}: signal needs exactly the columns id,value")
    ids, values, valid = [], [], []
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} cells, expected 2")
        ids.append(row[0])
        if row[1] == NA_TOKEN:
            values.append(np.nan)
            valid.append(False)
        else:
            values.append(_parse_float(row[1], path, i + 2, header[1]))
            valid.append(True)
    return ids, np.asarray(values, dtype=float), np.asarray(valid, dtype=bool)


def _load_distances(path):
    header, rows = _read_rows(path)
    ids = header[1:]
    n = len(ids)
    if len(rows) != n:
        raise SchemaError(f"{path}: matrix has {len(rows)} rows for {n} header ids")
    mat = np.zeros((n, n))
    for i, row in enumerate(rows):
        if len(row) != n + 1:
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} cells, expected {n + 1}")
        if row[0] != ids[i]:
            raise SchemaError(f"{path}: row id {row[0]!r} does not match header id {ids[i]!r}")
        for j, cell in enumerate(row[1:]):
            mat[i, j] = _parse_float(cell, path, i + 2, ids[j])
    return ids, mat


def _check_ids(ids_a, path_a, ids_b, path_b):
    if len(ids_a) != len(ids_b):
        raise SchemaError(
            f"row count mismatch: {path_a} has {len(ids_a)} rows, {path_b} has {len(ids_b)}")
    if set(ids_a) != set(ids_b):
        odd = (set(ids_a) ^ set(ids_b)).pop()
        raise SchemaError(f"id {odd!r} does not appear in both {path_a} and {path_b}")


def load_dataset(points_path=None, signal_path=None, distances_path=None) -> Dataset:
    """Load a dataset from the CSV schemas above.

    The signal file is required plus at least one of points/distances. Node
    order follows the points file (or the distance header when there are no
    points); signal rows are matched by id.
    """
    if signal_path is None:
        raise InvalidParameterError("a signal file is required")
    if points_path is None and distances_path is None:
        raise InvalidParameterError("provide a points file or a distance matrix")

    coords = distances = None
    if points_path is not None:
        node_ids, coords = _load_points(points_path)
        anchor_path = points_path
    if distances_path is not None:
        dist_ids, distances = _load_distances(distances_path)
        if points_path is None:
            node_ids, anchor_path = dist_ids, distances_path
        else:
            _check_ids(node_ids, anchor_path, dist_ids, distances_path)
            if dist_ids != node_ids:
                perm = [dist_ids.index(i) for i in node_ids]
                distances = distances[np.ix_(perm, perm)]

    if len(set(node_ids)) != len(node_ids):
        raise SchemaError(f"{anchor_path}: duplicate node ids")

    sig_ids, values, valid = _load_signal(signal_path)
    _check_ids(node_ids, anchor_path, sig_ids, signal_path)
    if sig_ids != node_ids:
        perm = [sig_ids.index(i) for i in node_ids]
        values, valid = values[perm], valid[perm]

    return Dataset(signal=values, valid=valid, coords=coords,
                   distances=distances, node_labels=tuple(node_ids))


def interpolate_invalid(signal, valid, g: Graph, max_sweeps: int = 100) -> np.ndarray:
    """Fill invalid entries with edge-weighted means of valid neighbors.

    Jacobi sweeps repeat so values propagate to nodes whose neighbors were
    all invalid initially; valid entries are never touched.
    """
    values = np.array(signal, dtype=float)
    valid = np.array(valid, dtype=bool)
    if values.shape != (g.n,) or valid.shape != (g.n,):
        raise InvalidInputError("signal length must match the graph size")
    if valid.all():
        return values
    if not valid.any():
        raise InterpolationFailureError("every sample is invalid; nothing to interpolate from")
    for _ in range(max_sweeps):
        w_valid = g.weights[:, valid]
        num = w_valid @ values[valid]
        den = w_valid.sum(axis=1)
        fillable = ~valid & (den > 0.0)
        if not fillable.any():
            node = int(np.flatnonzero(~valid)[0])
            raise InterpolationFailureError(
                f"node {node} is unreachable from any valid sample")
        values[fillable] = num[fillable] / den[fillable]
        valid |= fillable
        if valid.all():
            return values
    node = int(np.flatnonzero(~valid)[0])
    raise InterpolationFailureError(f"node {node} still unfilled after {max_sweeps} sweeps")


def remove_outlier(obs: Observation, node: int, mode: OutlierMode, g: Graph) -> Observation:
    """Drop one observation, either by masking it or by interpolating it.

    MASK zeroes the mask entry and keeps b; INTERPOLATE replaces b[node]
    with the edge-weighted mean of its neighbors and keeps the mask.
    """
    node = int(node)
    if not 0 <= node < obs.n:
        raise InvalidInputError(f"node {node} out of range")
    if g.n != obs.n:
        raise InvalidInputError("graph size does not match the observation")
    if mode == OutlierMode.MASK:
        mask = obs.mask.copy()
        mask[node] = 0.0
        return Observation(b=obs.b.copy(), mask=mask)
    if mode == OutlierMode.INTERPOLATE:
        nbrs = g.neighbors(node)
        if nbrs.size == 0:
            raise InvalidInputError(f"node {node} has no neighbors to interpolate from")
        w = g.weights[node, nbrs]
        b = obs.b.copy()
        b[node] = float(w @ obs.b[nbrs]) / float(w.sum())
        return Observation(b=b, mask=obs.mask.copy())
    raise InvalidParameterError(f"unknown outlier mode {mode!r}")


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isfinite(v):
            return float(f"{v:.9g}")
        return v
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def write_results(records, path, format: str = "csv", columns=None):
    """Write records (dicts sharing a key set) as CSV or JSON rows.

    Column order is taken from ``columns`` or from the first record; floats
    are serialized with 9 significant digits in both formats so the two
    round-trip to identical values.
    """
    fmt = str(format).lower()
    if fmt not in ("csv", "json"):
        raise InvalidParameterError(f"unknown format {format!r}")
    records = list(records)
    if columns is not None:
        cols = list(columns)
    elif records:
        cols = list(records[0].keys())
    else:
        cols = []
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for rec in records:
                writer.writerow([_format_cell(rec.get(c)) for c in cols])
    else:
        payload = [{c: _json_value(rec.get(c)) for c in cols} for rec in records]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
