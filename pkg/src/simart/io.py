"""File formats: 16-bit PGM rasters, raw arrays with JSON headers, CSV tables, hashes."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .core import SimartError

__all__ = ["write_pgm16", "read_pgm16", "write_raw", "read_raw", "write_csv", "sha256_file",
           "sha256_bytes", "canonical_json", "format_value"]


def write_pgm16(path, raster: np.ndarray) -> None:
    """Binary 16-bit PGM (P5, big-endian) with the raster maximum mapped to white.

    Row 0 of the array is written first; an all-zero raster is black.
    """
    raster = np.asarray(raster, dtype=float)
    if raster.ndim != 2:
        raise SimartError("PGM rasters must be two-dimensional")
    top = float(raster.max()) if raster.size else 0.0
    if top > 0:
        scaled = np.rint(np.clip(raster, 0, None) / top * 65535.0)
    else:
        scaled = np.zeros_like(raster)
    data = scaled.astype(">u2").tobytes()
    rows, cols = raster.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(data)


def read_pgm16(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise SimartError("not a binary PGM")
    cols, rows, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    dtype = ">u2" if maxval > 255 else "u1"
    body = parts[4]
    return np.frombuffer(body, dtype=dtype, count=rows * cols).reshape(rows, cols)


def write_raw(path, array: np.ndarray, header: dict | None = None) -> None:
    """Little-endian float64 array at ``path`` plus ``path.json`` with shape and metadata."""
    arr = np.ascontiguousarray(array, dtype="<f8")
    Path(path).write_bytes(arr.tobytes())
    meta = {"dtype": "<f8", "shape": list(arr.shape), **(header or {})}
    Path(str(path) + ".json").write_text(canonical_json(meta) + "\n")


def read_raw(path) -> tuple:
    meta = json.loads(Path(str(path) + ".json").read_text())
    arr = np.frombuffer(Path(path).read_bytes(), dtype=meta["dtype"]).reshape(meta["shape"])
    return arr, meta


def format_value(v) -> str:
    """Shortest round-trip text for floats; plain text otherwise."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def tree_hashes(root, exclude=()) -> dict:
    """SHA-256 of every file below ``root`` keyed by relative POSIX path."""
    root = Path(root)
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            p = Path(dirpath) / name
            rel = p.relative_to(root).as_posix()
            if rel in exclude:
                continue
            out[rel] = sha256_file(p)
    return dict(sorted(out.items()))
