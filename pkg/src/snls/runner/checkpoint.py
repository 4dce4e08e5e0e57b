"""Bit-exact binary checkpoints of a complex field.

Layout (little-endian)::

    b"SNLS" | version u32 | n u32 | half_width f64 | b f64 | alpha f64 | t f64
    | n*n complex samples as (re f64, im f64), row-major

``alpha`` is stored redundantly and must equal ``2 pi (2 - b)`` on read.
"""
from __future__ import annotations

import math
import os
import struct
from typing import NamedTuple

import numpy as np

from ..grid import GridSpec, make_grid
from ..nonlinearity import critical_alpha

MAGIC = b"SNLS"
VERSION = 1
_HEADER = struct.Struct("<4sIIdddd")


class CheckpointError(ValueError):
    pass


class Checkpoint(NamedTuple):
    field: np.ndarray
    t: float
    b: float
    grid: GridSpec


def checkpoint_write(path, grid: GridSpec, field: np.ndarray, t: float, b: float) -> None:
    field = np.asarray(grid.check(field), dtype=complex)
    header = _HEADER.pack(MAGIC, VERSION, grid.n, float(grid.half_width), float(b), critical_alpha(b), float(t))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field, dtype="<c16").tobytes())
    os.replace(tmp, path)


def checkpoint_read(path) -> Checkpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, n, half_width, b, alpha, t = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}, not a checkpoint")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version} (this build reads {VERSION})")
    expected = _HEADER.size + 16 * n * n
    if len(blob) != expected:
        raise CheckpointError(f"{path}: expected {expected} bytes for n={n}, found {len(blob)}")
    if not math.isclose(alpha, critical_alpha(b), rel_tol=1e-15, abs_tol=0.0):
        raise CheckpointError(f"{path}: stored alpha {alpha!r} differs from 2 pi (2 - b) for b={b!r}")
    field = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size).reshape(n, n).astype(complex)
    return Checkpoint(field, t, b, make_grid(n, half_width))
