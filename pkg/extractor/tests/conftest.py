"""Shared fixtures: a tiny local encoder and corpus builders.

The model is a 2-layer, 16-dim BERT-style encoder with a hand-written
WordPiece vocabulary, built once per session and saved to disk so the
extractor loads it through the same ``from_pretrained`` path as a real
checkpoint. Everything runs offline.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.pre_tokenizers import Whitespace
from tokenizers.processors import TemplateProcessing
from transformers import AutoModel, AutoTokenizer, BertConfig, BertModel, PreTrainedTokenizerFast

from embed_extractor.corpus import INSTANCES_HEADER, USAGES_HEADER

WORDS = [
    "[PAD]",
    "[UNK]",
    "[CLS]",
    "[SEP]",
    "the",
    "a",
    "bank",
    "river",
    "money",
    "holds",
    "flows",
    "of",
    "on",
    "cold",
    "deep",
    "token",
    "##ization",
    "##s",
    "word",
    "filler",
    "target",
]
VOCAB = {w: i for i, w in enumerate(WORDS)}
HIDDEN_SIZE = 16


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory) -> str:
    root = tmp_path_factory.mktemp("tiny_encoder")
    tok = Tokenizer(WordPiece(VOCAB, unk_token="[UNK]", max_input_chars_per_word=64))
    tok.pre_tokenizer = Whitespace()
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", VOCAB["[CLS]"]), ("[SEP]", VOCAB["[SEP]"])],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        model_max_length=64,
    )
    fast.save_pretrained(root)

    config = BertConfig(
        vocab_size=len(WORDS),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    torch.manual_seed(7)
    BertModel(config).eval().save_pretrained(root)
    return str(root)


@pytest.fixture(scope="session")
def tokenizer(model_dir):
    return AutoTokenizer.from_pretrained(model_dir)


@pytest.fixture(scope="session")
def model(model_dir):
    return AutoModel.from_pretrained(model_dir).eval()


def write_corpus(root: Path, usages, instances) -> dict[str, Path]:
    """Write the two corpus TSV files and return their paths.

    ``usages`` rows are ``(usage_id, lemma, language, start, end, context)``;
    ``instances`` rows are ``(instance_id, lemma, language, u1, u2, ratings)``.
    Contexts here are single-line and escape-free.
    """
    usages_path = root / "usages.tsv"
    instances_path = root / "instances.tsv"
    lines = ["\t".join(USAGES_HEADER)]
    for uid, lemma, lang, start, end, context in usages:
        lines.append("\t".join([uid, lemma, lang, str(start), str(end), context]))
    usages_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    lines = ["\t".join(INSTANCES_HEADER)]
    for iid, lemma, lang, u1, u2, ratings in instances:
        lines.append("\t".join([iid, lemma, lang, u1, u2, ratings]))
    instances_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"usages": usages_path, "instances": instances_path, "out": root / "embeddings.wice"}


def build_corpus(root: Path) -> dict[str, Path]:
    """Default corpus: three usages cross-paired so every usage is shared."""
    usages = [
        ("u1", "bank", "en", 4, 8, "the bank of the river"),
        ("u2", "bank", "en", 4, 8, "the bank holds money"),
        ("u3", "bank", "en", 4, 9, "the river flows cold"),
    ]
    instances = [
        ("i1", "bank", "en", "u1", "u2", "2,3"),
        ("i2", "bank", "en", "u1", "u3", "1,1"),
        ("i3", "bank", "en", "u2", "u3", "4,2,3"),
    ]
    return write_corpus(root, usages, instances)


def read_records(path: Path) -> tuple[int, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Minimal store reader for assertions: header dim + id -> (e1, e2)."""
    data = path.read_bytes()
    magic, version, dim, count = struct.unpack_from("<4sHIQ", data, 0)
    assert magic == b"WICE" and version == 1
    offset = struct.calcsize("<4sHIQ")
    records: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        iid = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        e1 = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        e2 = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        records[iid] = (e1, e2)
    assert offset == len(data)
    return dim, records
