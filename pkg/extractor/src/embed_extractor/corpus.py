"""Reading the word-in-context corpus TSV files.

The extractor consumes the same two files the modeling pipeline reads:

* ``usages.tsv``: ``usage_id, lemma, language, target_start, target_end, context``
* ``instances.tsv``: ``instance_id, lemma, language, usage_1, usage_2, ratings``

Contexts are stored on one line with backslash, tab, newline, and carriage
return escaped (``\\\\``, ``\\t``, ``\\n``, ``\\r``). The ``ratings`` column
is carried by the schema but not used here; embeddings depend only on the
contexts and target spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import DataError

USAGES_HEADER = ["usage_id", "lemma", "language", "target_start", "target_end", "context"]
INSTANCES_HEADER = ["instance_id", "lemma", "language", "usage_1", "usage_2", "ratings"]


def unescape_context(text: str) -> str:
    """Decode a one-line context back to its original string."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            else:
                out.append(ch)
                out.append(nxt)
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


@dataclass(frozen=True)
class Usage:
    """One occurrence of a lemma in a context, with character-level target span."""

    usage_id: str
    context: str
    lemma: str
    target_start: int
    target_end: int
    language: str

    def __post_init__(self) -> None:
        if not (0 <= self.target_start < self.target_end <= len(self.context)):
            raise DataError(
                f"usage {self.usage_id!r}: target span [{self.target_start}, "
                f"{self.target_end}) invalid for context of length {len(self.context)}"
            )


@dataclass(frozen=True)
class InstancePair:
    """One annotated usage pair; only the ids matter for extraction."""

    instance_id: str
    usage_1: str
    usage_2: str


def _parse_tsv(path: str | Path, header: list[str]) -> Iterable[tuple[int, list[str]]]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty file (expected header row)")
    got = lines[0].split("\t")
    if got != header:
        raise DataError(f"{path}: bad header {got!r}, expected {header!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(header):
            raise DataError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        yield lineno, fields


def load_usages(path: str | Path) -> dict[str, Usage]:
    """Parse ``usages.tsv`` into a map keyed by usage_id."""
    usages: dict[str, Usage] = {}
    for lineno, fields in _parse_tsv(path, USAGES_HEADER):
        usage_id, lemma, language, start_s, end_s, raw_context = fields
        try:
            start, end = int(start_s), int(end_s)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-integer target offsets") from exc
        if usage_id in usages:
            raise DataError(f"{path}:{lineno}: duplicate usage_id {usage_id!r}")
        usages[usage_id] = Usage(
            usage_id=usage_id,
            context=unescape_context(raw_context),
            lemma=lemma,
            target_start=start,
            target_end=end,
            language=language,
        )
    return usages


def load_instance_pairs(path: str | Path) -> list[InstancePair]:
    """Parse ``instances.tsv`` down to the usage pairings, in file order."""
    pairs: list[InstancePair] = []
    seen: set[str] = set()
    for lineno, fields in _parse_tsv(path, INSTANCES_HEADER):
        instance_id, _lemma, _language, usage_1, usage_2, _ratings = fields
        if instance_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate instance_id {instance_id!r}")
        seen.add(instance_id)
        pairs.append(InstancePair(instance_id=instance_id, usage_1=usage_1, usage_2=usage_2))
    return pairs
