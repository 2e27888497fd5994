"""Bit-exact binary tensor files (TSSF) and layer-bundle manifests.

Layout, all little-endian:

    magic   4 bytes  ``TSSF``
    version 1 byte   ``1``
    dtype   1 byte   ``1`` (32-bit float)
    flags   2 bytes  reserved, must be 0
    ndim    4 bytes  unsigned
    dims    ndim x 8 bytes unsigned
    payload 4 * prod(dims) bytes, row-major float32

Feature-map files have ndim 3 with dims (C, H, W). A bundle manifest is a
plain-text file with one ``name<TAB>relative/path`` line per layer; blank
lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import FeatureMap
from .errors import TssfFormatError
from .losses import CANONICAL_LAYERS, LayerFeatures

__all__ = [
    "write_tssf",
    "read_tssf",
    "write_tssf_array",
    "read_tssf_array",
    "read_bundle",
    "write_bundle",
]

MAGIC = b"TSSF"
VERSION = 1
DTYPE_FLOAT32 = 1
_FIXED_HEADER = struct.Struct("<4sBBHI")
_MAX_NDIM = 32


def write_tssf_array(array: np.ndarray, path) -> None:
    """Write any-rank float32 tensor bytes exactly per the layout above."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim < 1 or arr.ndim > _MAX_NDIM:
        raise TssfFormatError(f"ndim must be in [1, {_MAX_NDIM}], got {arr.ndim}")
    if min(arr.shape) < 1:
        raise TssfFormatError(f"all dims must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TssfFormatError("refusing to write non-finite values")
    header = _FIXED_HEADER.pack(MAGIC, VERSION, DTYPE_FLOAT32, 0, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}Q", *arr.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(dims)
        fh.write(arr.tobytes(order="C"))


def read_tssf_array(path) -> np.ndarray:
    """Read and validate a TSSF file into a float32 array."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FIXED_HEADER.size:
        raise TssfFormatError(
            f"{path}: file too short for a TSSF header "
            f"({len(blob)} bytes, need {_FIXED_HEADER.size})"
        )
    magic, version, dtype, flags, ndim = _FIXED_HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise TssfFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise TssfFormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_FLOAT32:
        raise TssfFormatError(f"{path}: unsupported dtype code {dtype}")
    if flags != 0:
        raise TssfFormatError(f"{path}: reserved flags must be 0, got {flags}")
    if ndim < 1 or ndim > _MAX_NDIM:
        raise TssfFormatError(f"{path}: ndim {ndim} out of range [1, {_MAX_NDIM}]")
    dims_end = _FIXED_HEADER.size + 8 * ndim
    if len(blob) < dims_end:
        raise TssfFormatError(f"{path}: truncated dims block")
    dims = struct.unpack_from(f"<{ndim}Q", blob, _FIXED_HEADER.size)
    if min(dims) < 1:
        raise TssfFormatError(f"{path}: all dims must be positive, got {dims}")
    expected = 4 * int(np.prod([int(d) for d in dims], dtype=object))
    actual = len(blob) - dims_end
    if actual != expected:
        kind = "truncated" if actual < expected else "oversized"
        raise TssfFormatError(
            f"{path}: {kind} payload, expected {expected} bytes, got {actual}"
        )
    arr = np.frombuffer(blob, dtype="<f4", offset=dims_end).reshape(dims)
    if not np.all(np.isfinite(arr)):
        raise TssfFormatError(f"{path}: payload contains non-finite values")
    return arr.astype(np.float32, copy=True)


def write_tssf(fmap: FeatureMap, path) -> None:
    """Write a feature map as a 3-d TSSF file; round-trips bit for bit."""
    write_tssf_array(fmap.data, path)


def read_tssf(path) -> FeatureMap:
    """Read a 3-d TSSF file as a feature map."""
    arr = read_tssf_array(path)
    if arr.ndim != 3:
        raise TssfFormatError(f"{path}: feature maps need ndim 3, got {arr.ndim}")
    return FeatureMap(arr)


def read_bundle(manifest_path) -> LayerFeatures:
    """Load the layer bundle described by a manifest, in canonical order."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    entries: list[tuple[str, FeatureMap]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(manifest_path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise TssfFormatError(
                f"{manifest_path}:{lineno}: expected 'name<TAB>path', got {raw!r}"
            )
        name, rel = parts
        if name not in CANONICAL_LAYERS:
            raise TssfFormatError(
                f"{manifest_path}:{lineno}: unknown layer {name!r}, "
                f"expected one of {CANONICAL_LAYERS}"
            )
        if name in seen:
            raise TssfFormatError(f"{manifest_path}:{lineno}: duplicate layer {name!r}")
        seen.add(name)
        entries.append((name, read_tssf(base / rel)))
    if not entries:
        raise TssfFormatError(f"{manifest_path}: manifest lists no layers")
    return LayerFeatures(entries)


def write_bundle(features: LayerFeatures, out_dir, manifest_name: str = "manifest.txt", comment: str | None = None) -> Path:
    """Write each layer as ``<name>.tssf`` plus a manifest; returns its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for name, fmap in features:
        fname = f"{name}.tssf"
        write_tssf(fmap, out_dir / fname)
        lines.append(f"{name}\t{fname}")
    manifest = out_dir / manifest_name
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
