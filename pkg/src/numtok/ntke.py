"""Embedding matrix file format.

Layout (bit-exact): magic bytes "NTKE", version byte 0x01, unsigned 32-bit
little-endian row count, unsigned 32-bit little-endian dim count, then
row-major little-endian 32-bit floats.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"NTKE"
VERSION = 0x01


class NtkeFormatError(ValueError):
    pass


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    m = np.ascontiguousarray(matrix, dtype="<f4")
    if m.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {m.shape}")
    rows, dims = m.shape
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([VERSION]))
        f.write(struct.pack("<II", rows, dims))
        f.write(m.tobytes())


def read_matrix(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 13 or data[:4] != MAGIC:
        raise NtkeFormatError(f"{path}: not an NTKE file")
    if data[4] != VERSION:
        raise NtkeFormatError(f"{path}: unsupported version {data[4]}")
    rows, dims = struct.unpack_from("<II", data, 5)
    expected = 13 + 4 * rows * dims
    if len(data) != expected:
        raise NtkeFormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    body = np.frombuffer(data, dtype="<f4", offset=13)
    return body.reshape(rows, dims)
