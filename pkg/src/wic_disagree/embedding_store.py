"""Bit-exact binary interchange format for paired contextual embeddings.

Layout (all little-endian):

    magic   4 bytes  b"WICE"
    version u16      1
    dim     u32      d
    count   u64      number of records
    then per record:
        id_len  u16
        id      id_len bytes, UTF-8
        e1      d * f32
        e2      d * f32

Vectors are stored as 32-bit floats; consumers may upcast internally.
Reading a store validates the header against the actual payload and refuses
partial loads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError, FormatError

MAGIC = b"WICE"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")


@dataclass(frozen=True)
class EmbeddingRecord:
    """Embeddings of the lemma in the two contexts of one instance."""

    instance_id: str
    e1: np.ndarray
    e2: np.ndarray


class EmbeddingStore:
    """In-memory map instance_id -> (e1, e2), all sharing one dimension.

    Immutable after construction; concurrent reads are safe.
    """

    def __init__(self, dim: int, ids: Sequence[str], matrix: np.ndarray):
        # matrix rows are [e1 | e2] per instance, float32, shape (n, 2*dim)
        self.dim = dim
        self.ids = list(ids)
        self._matrix = matrix
        self._index = {iid: row for row, iid in enumerate(self.ids)}
        if len(self._index) != len(self.ids):
            raise DataError("duplicate instance_id in embedding store")

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, instance_id: str) -> bool:
        return instance_id in self._index

    def record(self, instance_id: str) -> EmbeddingRecord:
        try:
            row = self._index[instance_id]
        except KeyError:
            raise DataError(f"instance_id {instance_id!r} not in embedding store") from None
        d = self.dim
        return EmbeddingRecord(
            instance_id=instance_id,
            e1=self._matrix[row, :d].copy(),
            e2=self._matrix[row, d:].copy(),
        )

    def records(self) -> Iterable[EmbeddingRecord]:
        for iid in self.ids:
            yield self.record(iid)


def _as_f32_vector(v: np.ndarray | Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float32).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{what}: non-finite component in embedding vector")
    return arr


def write_store(records: Iterable[EmbeddingRecord | tuple], path: str | Path) -> None:
    """Write records in the given order. Re-reading yields bit-identical vectors."""
    entries: list[tuple[str, np.ndarray, np.ndarray]] = []
    dim: Optional[int] = None
    for rec in records:
        if isinstance(rec, EmbeddingRecord):
            iid, e1, e2 = rec.instance_id, rec.e1, rec.e2
        else:
            iid, e1, e2 = rec
        e1 = _as_f32_vector(e1, f"record {iid!r} e1")
        e2 = _as_f32_vector(e2, f"record {iid!r} e2")
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
        out += e1.astype("<f4").tobytes()
        out += e2.astype("<f4").tobytes()
    Path(path).write_bytes(bytes(out))


def read_store(path: str | Path) -> EmbeddingStore:
    """Load a full store, validating magic, version, count, and dimension."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header at byte {len(data)}")
    magic, version, dim, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r} (expected {MAGIC!r})")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise FormatError(f"{path}: zero dimension in header")

    offset = _HEADER.size
    vec_bytes = 4 * dim
    ids: list[str] = []
    matrix = np.empty((count, 2 * dim), dtype=np.float32)
    for row in range(count):
        if offset + 2 > len(data):
            raise FormatError(f"{path}: truncated at byte {offset} (record {row})")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        end = offset + id_len + 2 * vec_bytes
        if end > len(data):
            raise FormatError(f"{path}: truncated at byte {offset} (record {row})")
        try:
            iid = data[offset : offset + id_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: invalid UTF-8 id at byte {offset}") from exc
        offset += id_len
        matrix[row] = np.frombuffer(data, dtype="<f4", count=2 * dim, offset=offset)
        offset += 2 * vec_bytes
        ids.append(iid)
    if offset != len(data):
        raise FormatError(
            f"{path}: {len(data) - offset} trailing bytes after {count} records"
        )
    return EmbeddingStore(dim=dim, ids=ids, matrix=matrix)


def export_debug_tsv(store: EmbeddingStore, path: str | Path) -> None:
    """Human-inspectable dump: instance_id then 2d float columns, 9 significant digits."""
    d = store.dim
    header = ["instance_id"] + [f"e1_{j}" for j in range(d)] + [f"e2_{j}" for j in range(d)]
    lines = ["\t".join(header)]
    for rec in store.records():
        vals = [f"{float(x):.9g}" for x in np.concatenate([rec.e1, rec.e2])]
        lines.append("\t".join([rec.instance_id] + vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class AlignedView:
    """Row-aligned embedding matrices (float64) in dataset order."""

    instance_ids: list[str]
    e1: np.ndarray
    e2: np.ndarray


def join(instance_ids: Sequence[str], store: EmbeddingStore) -> AlignedView:
    """Gather embeddings for the given instance ids, preserving their order.

    Raises :class:`DataError` listing up to 10 missing ids if the store does
    not cover the request.
    """
    missing = [iid for iid in instance_ids if iid not in store]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise DataError(f"embedding store is missing {len(missing)} instance ids: {shown}{more}")
    rows = [store._index[iid] for iid in instance_ids]
    d = store.dim
    sub = store._matrix[rows].astype(np.float64)
    return AlignedView(instance_ids=list(instance_ids), e1=sub[:, :d], e2=sub[:, d:])
