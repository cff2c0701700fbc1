"""Versioned binary checkpoints for trained neural models.

Layout (little-endian): magic ``WICM`` (4 bytes), version u16 = 1, then a
u32-length-prefixed UTF-8 JSON blob echoing the architecture and train
config, then the parameter tensors as f32 in the order listed by the JSON
manifest.
"""

from __future__ import annotations

import dataclasses
import json
import struct

import numpy as np

from ..errors import FormatError
from .models import AdapterModel, LinearHeadModel
from .training import TrainConfig, make_model

MAGIC = b"WICM"
VERSION = 1

_HEADER = struct.Struct("<4sH")
_U32 = struct.Struct("<I")


def _describe(model) -> tuple[str, int]:
    if isinstance(model, AdapterModel):
        return "adapter", model.dim
    if isinstance(model, LinearHeadModel):
        return "linear", model.in_dim // 2
    raise FormatError(f"cannot checkpoint model of type {type(model).__name__}")


def save_model(path, model, task: str, config: TrainConfig) -> None:
    method, dim = _describe(model)
    named = model.named_params()
    meta = {
        "method": method,
        "task": task,
        "dim": dim,
        "config": dataclasses.asdict(config),
        "tensors": [{"name": name, "shape": list(p.value.shape)} for name, p in named],
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION))
        fh.write(_U32.pack(len(blob)))
        fh.write(blob)
        for _, p in named:
            fh.write(np.ascontiguousarray(p.value, dtype="<f4").tobytes())


def load_model(path):
    """Read a checkpoint; returns (model, task, config)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size + _U32.size:
        raise FormatError(f"{path}: truncated checkpoint header")
    magic, version = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    (blob_len,) = _U32.unpack_from(data, _HEADER.size)
    off = _HEADER.size + _U32.size
    if off + blob_len > len(data):
        raise FormatError(f"{path}: truncated config blob")
    try:
        meta = json.loads(data[off : off + blob_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable config blob: {exc}") from exc
    off += blob_len

    cfg_dict = dict(meta["config"])
    cfg_dict["hidden"] = tuple(cfg_dict["hidden"])
    config = TrainConfig(**cfg_dict)
    model = make_model(meta["method"], meta["task"], meta["dim"], config)
    params = dict(model.named_params())
    manifest = meta["tensors"]
    if [t["name"] for t in manifest] != list(params):
        raise FormatError(f"{path}: parameter manifest does not match architecture")
    for entry in manifest:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = 4 * count
        if off + nbytes > len(data):
            raise FormatError(
                f"{path}: truncated tensor {entry['name']!r} at byte {off}"
            )
        tensor = np.frombuffer(data, dtype="<f4", count=count, offset=off)
        param = params[entry["name"]]
        if param.value.shape != shape:
            raise FormatError(
                f"{path}: tensor {entry['name']!r} has shape {shape}, "
                f"expected {param.value.shape}"
            )
        param.value[...] = tensor.reshape(shape).astype(np.float64)
        off += nbytes
    if off != len(data):
        raise FormatError(f"{path}: {len(data) - off} trailing bytes after tensors")
    return model, meta["task"], config
