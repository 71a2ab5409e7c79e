"""Binary field snapshots (.ksns files).

Layout: a 32-byte header followed by the payload.

    bytes 0-3    magic "KSNS"
    bytes 4-7    format version, u32 little-endian (currently 1)
    bytes 8-11   n_points, u32 little-endian
    bytes 12-19  box_length, f64 little-endian
    byte  20     representation: 0 = real-space, 1 = spectral
    bytes 21-31  zero padding

Payload: row-major little-endian f64 point values (real) or interleaved
(re, im) f64 pairs per coefficient (spectral).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .spectral import REAL, SPECTRAL, Grid, ScalarField

MAGIC = b"KSNS"
VERSION = 1
_HEADER = struct.Struct("<4sIIdB11x")

assert _HEADER.size == 32


class SnapshotFormatError(ValueError):
    """Corrupt or unsupported snapshot file."""


def write_snapshot(path, fld: ScalarField) -> None:
    rep_code = 1 if fld.is_spectral else 0
    header = _HEADER.pack(MAGIC, VERSION, fld.grid.n_points, fld.grid.box_length, rep_code)
    if fld.is_spectral:
        payload = np.ascontiguousarray(fld.values, dtype="<c16").tobytes()
    else:
        payload = np.ascontiguousarray(fld.values, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path) -> ScalarField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, version, n_points, box_length, rep_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    grid = Grid(n_points=n_points, box_length=box_length)
    count = n_points * n_points
    body = raw[_HEADER.size:]
    if rep_code == 0:
        if len(body) != 8 * count:
            raise SnapshotFormatError(f"{path}: payload size mismatch")
        values = np.frombuffer(body, dtype="<f8").reshape(n_points, n_points).copy()
        return ScalarField(grid, values, REAL)
    if rep_code == 1:
        if len(body) != 16 * count:
            raise SnapshotFormatError(f"{path}: payload size mismatch")
        values = np.frombuffer(body, dtype="<c16").reshape(n_points, n_points).copy()
        return ScalarField(grid, values.astype(complex), SPECTRAL)
    raise SnapshotFormatError(f"{path}: unknown representation code {rep_code}")
