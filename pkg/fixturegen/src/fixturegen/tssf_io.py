"""TSSF tensor files and bundle manifests, written per the engine's contract.

Layout, little-endian: ``TSSF`` magic, version byte 1, dtype byte 1
(float32), two reserved zero bytes, uint32 ndim, ndim uint64 dims, then the
row-major float32 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TSSF"
VERSION = 1
DTYPE_FLOAT32 = 1


def write_tssf(array: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim < 1:
        raise ValueError("tensor must have at least one dimension")
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite values")
    header = struct.pack("<4sBBHI", MAGIC, VERSION, DTYPE_FLOAT32, 0, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}Q", *arr.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(dims)
        fh.write(arr.tobytes(order="C"))


def write_manifest(entries: dict[str, str], path, comment: str | None = None) -> Path:
    """One ``name<TAB>relative_path`` line per layer, optional leading comment."""
    path = Path(path)
    lines = [f"# {comment}"] if comment else []
    lines.extend(f"{name}\t{rel}" for name, rel in entries.items())
    path.write_text("\n".join(lines) + "\n")
    return path
