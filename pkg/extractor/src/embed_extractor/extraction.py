"""Batched extraction of paired target-word embeddings from a frozen encoder.

For every usage referenced by an instance, the vector is the arithmetic
mean of the encoder's last-layer hidden states over the subword tokens
that overlap the target span. Each usage is embedded exactly once and
cached by usage_id, so a usage shared by several instances contributes
bit-identical vectors to each. Inference runs in eval mode under
``no_grad`` in batches ordered by usage_id; records are written sorted by
instance_id. Both orders are deterministic, so repeated extraction yields
byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .alignment import EncodedUsage, encode_usage
from .corpus import load_instance_pairs, load_usages
from .errors import DataError, ModelError
from .store import write_store

DEFAULT_MODEL = "xlm-roberta-base"


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs of one extraction run.

    ``max_len`` caps the subword sequence length including special tokens;
    longer contexts are truncated around the target (see ``alignment``).
    """

    model: str = DEFAULT_MODEL
    max_len: int = 512
    batch_size: int = 16
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.max_len < 4:
            raise DataError(f"max_len must be >= 4, got {self.max_len}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class ExtractionSummary:
    """What one run produced: counts and the embedding dimension."""

    n_instances: int
    n_usages: int
    dim: int


def load_encoder(config: ExtractionConfig):
    """Load tokenizer and model, wrapping any failure in :class:`ModelError`.

    The tokenizer must be a "fast" one: character-to-subword alignment
    needs its offset mapping.
    """
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model)
        model = AutoModel.from_pretrained(config.model)
    except Exception as exc:
        raise ModelError(f"cannot load model {config.model!r}: {exc}") from exc
    if not getattr(tokenizer, "is_fast", False):
        raise ModelError(
            f"model {config.model!r} has no fast tokenizer; offset mapping is required"
        )
    model.to(config.device)
    model.eval()
    return tokenizer, model


def _pool_batch(model, batch: list[EncodedUsage], pad_id: int, device: str) -> list[np.ndarray]:
    """Run one padded batch and mean-pool each usage's target positions."""
    width = max(len(e.input_ids) for e in batch)
    input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
    attention = torch.zeros((len(batch), width), dtype=torch.long)
    for row, e in enumerate(batch):
        n = len(e.input_ids)
        input_ids[row, :n] = torch.tensor(e.input_ids, dtype=torch.long)
        attention[row, :n] = 1
    with torch.no_grad():
        out = model(input_ids=input_ids.to(device), attention_mask=attention.to(device))
    hidden = out.last_hidden_state
    vectors = []
    for row, e in enumerate(batch):
        pos = torch.tensor(e.target_positions, dtype=torch.long)
        vec = hidden[row, pos, :].mean(dim=0)
        vectors.append(vec.cpu().numpy().astype(np.float32, copy=False))
    return vectors


def embed_usages(tokenizer, model, usages, config: ExtractionConfig) -> dict[str, np.ndarray]:
    """One vector per usage, computed in sorted usage_id order."""
    pad_id = tokenizer.pad_token_id
    if pad_id is None:
        pad_id = 0
    encoded = [
        encode_usage(tokenizer, u, config.max_len)
        for u in sorted(usages, key=lambda u: u.usage_id)
    ]
    vectors: dict[str, np.ndarray] = {}
    for lo in range(0, len(encoded), config.batch_size):
        batch = encoded[lo : lo + config.batch_size]
        for e, vec in zip(batch, _pool_batch(model, batch, pad_id, config.device)):
            vectors[e.usage_id] = vec
    return vectors


def extract(
    usages_path: str | Path,
    instances_path: str | Path,
    out_path: str | Path,
    config: ExtractionConfig | None = None,
) -> ExtractionSummary:
    """Embed every usage referenced by an instance and write the pair store.

    One record per instance: ``(instance_id, vector(usage_1), vector(usage_2))``,
    sorted by instance_id.
    """
    config = config or ExtractionConfig()
    usages = load_usages(usages_path)
    pairs = load_instance_pairs(instances_path)
    if not pairs:
        raise DataError(f"{instances_path}: no instances to embed")
    for pair in pairs:
        for uid in (pair.usage_1, pair.usage_2):
            if uid not in usages:
                raise DataError(
                    f"instance {pair.instance_id!r} references unknown usage {uid!r}"
                )

    needed_ids = {uid for pair in pairs for uid in (pair.usage_1, pair.usage_2)}
    tokenizer, model = load_encoder(config)
    vectors = embed_usages(tokenizer, model, [usages[uid] for uid in needed_ids], config)

    dim = int(next(iter(vectors.values())).shape[0])
    if dim != int(model.config.hidden_size):
        raise ModelError(
            f"pooled dimension {dim} does not match model hidden size "
            f"{model.config.hidden_size}"
        )
    records = [
        (pair.instance_id, vectors[pair.usage_1], vectors[pair.usage_2])
        for pair in sorted(pairs, key=lambda p: p.instance_id)
    ]
    n_records = write_store(records, out_path)
    return ExtractionSummary(n_instances=n_records, n_usages=len(vectors), dim=dim)
