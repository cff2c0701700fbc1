"""Writer for the paired-embedding binary interchange format.

Layout (all little-endian), shared with the modeling pipeline that
consumes these files:

    magic   4 bytes  b"WICE"
    version u16      1
    dim     u32      d
    count   u64      number of records
    then per record:
        id_len  u16
        id      id_len bytes, UTF-8
        e1      d * f32
        e2      d * f32

Vectors are written as 32-bit floats exactly as produced, so re-reading a
store yields bit-identical values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataError

MAGIC = b"WICE"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")


@dataclass(frozen=True)
class StoreHeader:
    """Decoded fixed-size header of a store file."""

    version: int
    dim: int
    count: int


def write_store(records: Iterable[tuple[str, np.ndarray, np.ndarray]], path: str | Path) -> int:
    """Write ``(instance_id, e1, e2)`` records in the given order.

    Returns the number of records written. All vectors must be float32 of
    one shared dimension; ids must be unique.
    """
    entries = []
    dim: int | None = None
    for iid, e1, e2 in records:
        e1 = np.ascontiguousarray(e1, dtype="<f4").reshape(-1)
        e2 = np.ascontiguousarray(e2, dtype="<f4").reshape(-1)
        if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
            raise DataError(f"record {iid!r}: non-finite component in embedding vector")
        if e1.shape != e2.shape:
            raise DataError(f"record {iid!r}: e1 and e2 have different lengths")
        if dim is None:
            dim = int(e1.shape[0])
        elif int(e1.shape[0]) != dim:
            raise DataError(
                f"record {iid!r}: dimension {e1.shape[0]} does not match store dimension {dim}"
            )
        entries.append((iid, e1, e2))
    if dim is None:
        raise DataError("cannot write an empty embedding store")

    seen: set[str] = set()
    out = bytearray()
    out += _HEADER.pack(MAGIC, VERSION, dim, len(entries))
    for iid, e1, e2 in entries:
        if iid in seen:
            raise DataError(f"duplicate instance_id {iid!r} in records")
        seen.add(iid)
        id_bytes = iid.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise DataError(f"instance_id {iid!r} exceeds 65535 UTF-8 bytes")
        out += struct.pack("<H", len(id_bytes))
        out += id_bytes
        out += e1.tobytes()
        out += e2.tobytes()
    Path(path).write_bytes(bytes(out))
    return len(entries)


def read_header(path: str | Path) -> StoreHeader:
    """Decode just the header of a store file (for summaries and checks)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DataError(f"{path}: truncated header at byte {len(data)}")
    magic, version, dim, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r} (expected {MAGIC!r})")
    return StoreHeader(version=version, dim=dim, count=count)
