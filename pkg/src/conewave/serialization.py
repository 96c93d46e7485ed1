"""Binary field files with JSON sidecars, and plot-ready CSV tables.

A field is stored as raw little-endian complex samples in C order
(``<stem>.bin``) next to ``<stem>.json`` holding ``m``, ``L``, ``N``, the
per-axis representation, dtype and shape.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from .errors import StructuralError
from .spectral_core import Grid, SampledField

_DTYPES = {"complex64": "<c8", "complex128": "<c16"}


def write_array(stem, values: np.ndarray, meta: Dict, dtype: str = "complex128") -> Path:
    """Write ``values`` as ``<stem>.bin`` plus a ``<stem>.json`` sidecar."""
    if dtype not in _DTYPES:
        raise StructuralError(f"dtype must be one of {sorted(_DTYPES)}")
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(values, dtype=_DTYPES[dtype])
    stem.with_suffix(".bin").write_bytes(arr.tobytes())
    side = dict(meta)
    side.update({"dtype": dtype, "byteorder": "little", "order": "C", "shape": list(arr.shape)})
    stem.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    return stem.with_suffix(".bin")


def read_array(stem):
    """Inverse of :func:`write_array`; returns ``(values, sidecar)``."""
    stem = Path(stem)
    side = json.loads(stem.with_suffix(".json").read_text())
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype=_DTYPES[side["dtype"]])
    return raw.reshape(side["shape"]).astype(complex), side


def write_field(stem, fld: SampledField, dtype: str = "complex128", extra: Optional[Dict] = None) -> Path:
    meta = {"m": fld.grid.m, "L": fld.grid.L, "N": fld.grid.N, "rep": list(fld.reps),
            "smoothness_tag": fld.smoothness_tag}
    if extra:
        meta.update(extra)
    return write_array(stem, fld.values, meta, dtype)


def read_field(stem) -> SampledField:
    values, side = read_array(stem)
    grid = Grid(side["m"], side["L"], side["N"])
    return SampledField(grid, values, tuple(side["rep"]), side.get("smoothness_tag"))


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], params: Optional[Dict] = None) -> Path:
    """CSV with an optional ``# key=value`` parameter line ahead of the header.

    Floats are written with ``repr`` so repeated runs give identical bytes.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if params:
            fh.write("# " + ", ".join(f"{k}={params[k]}" for k in sorted(params)) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path):
    """Return ``(columns, rows as float array)`` skipping ``#`` lines."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rd = csv.reader(lines)
    columns = next(rd)
    data = np.array([[float(v) for v in row] for row in rd])
    return columns, data
