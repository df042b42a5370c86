"""On-disk formats: raw field dumps with a JSON sidecar, CSV tables and
versioned JSON summaries.

A dump ``name.bin`` holds little-endian float64 samples in row-major order;
complex fields store ``(re, im)`` pairs interleaved. ``name.json`` next to it
records ``n``, ``L``, ``dtype``, ``complex`` and a free-text description.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .grid import Field, build_grid

SCHEMA = "planar-sps/1"

__all__ = [
    "SCHEMA",
    "write_field",
    "read_field",
    "write_csv",
    "read_csv",
    "write_summary",
    "dumps_summary",
    "jsonable",
]


def _paths(path):
    path = Path(path)
    if path.suffix in (".bin", ".json"):
        path = path.with_suffix("")
    return path.with_suffix(".bin"), path.with_suffix(".json")


def write_field(path, u, description=""):
    """Write ``u`` to ``path.bin`` plus ``path.json``; returns both paths."""
    bin_path, meta_path = _paths(path)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    if u.is_complex:
        raw = np.empty(u.values.shape + (2,), dtype="<f8")
        raw[..., 0] = u.values.real
        raw[..., 1] = u.values.imag
    else:
        raw = np.ascontiguousarray(u.values, dtype="<f8")
    bin_path.write_bytes(raw.tobytes(order="C"))
    meta = {
        "n": u.grid.n,
        "L": u.grid.L,
        "dtype": "float64-le",
        "complex": bool(u.is_complex),
        "description": description,
    }
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return bin_path, meta_path


def read_field(path):
    bin_path, meta_path = _paths(path)
    meta = json.loads(meta_path.read_text())
    grid = build_grid(meta["L"], meta["n"])
    raw = np.frombuffer(bin_path.read_bytes(), dtype="<f8")
    n = grid.n
    if meta["complex"]:
        if raw.size != 2 * n * n:
            raise ValueError(f"{bin_path}: expected {2 * n * n} values, found {raw.size}")
        pairs = raw.reshape(n, n, 2)
        values = pairs[..., 0] + 1j * pairs[..., 1]
    else:
        if raw.size != n * n:
            raise ValueError(f"{bin_path}: expected {n * n} values, found {raw.size}")
        values = raw.reshape(n, n).astype(np.float64)
    return Field(grid, values)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return v


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_summary(kind, payload):
    doc = {"schema": SCHEMA, "kind": kind, "result": jsonable(payload)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_summary(path, kind, payload):
    """Write a schema-tagged summary. The text depends only on ``payload``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_summary(kind, payload))
    return path
