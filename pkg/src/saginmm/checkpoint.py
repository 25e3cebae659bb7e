"""Deterministic binary checkpoint container.

Layout: magic, format version, a canonical JSON header (scalars, RNG states,
array manifest), then the raw float64/int64 array payloads in manifest order.
Writing the same state twice yields identical bytes, and save -> load -> save
round-trips exactly. Files are written atomically via a temp file + rename.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .errors import CheckpointError

MAGIC = b"SAGINMM\x00"
FORMAT_VERSION = 1


def save_checkpoint(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    manifest = []
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        manifest.append({"name": name, "dtype": arr.dtype.str,
                         "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = json.dumps(
        {"format_version": FORMAT_VERSION, "meta": meta, "arrays": manifest},
        sort_keys=True, separators=(",", ":")).encode()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < len(MAGIC) + 8 or raw[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path} is not a recognized checkpoint file")
    (header_len,) = struct.unpack_from("<Q", raw, len(MAGIC))
    start = len(MAGIC) + 8
    if start + header_len > len(raw):
        raise CheckpointError(f"{path} is truncated (header)")
    try:
        header = json.loads(raw[start:start + header_len])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path} has a corrupt header: {exc}") from exc
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path} uses format version {version!r}, this build reads {FORMAT_VERSION}")
    arrays = {}
    offset = start + header_len
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = dtype.itemsize * count
        if offset + nbytes > len(raw):
            raise CheckpointError(f"{path} is truncated (array {entry['name']})")
        arr = np.frombuffer(raw[offset:offset + nbytes], dtype=dtype).reshape(shape)
        arrays[entry["name"]] = arr.copy()
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path} has {len(raw) - offset} trailing bytes")
    return header["meta"], arrays
