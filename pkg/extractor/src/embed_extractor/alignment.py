"""Character-span to subword-token alignment, with target-preserving truncation.

A subword belongs to the target iff its character offsets overlap
``[target_start, target_end)`` — overlap rather than exact match, so
tokenizers that split across the target boundary still yield a non-empty
set. Contexts longer than the model limit are truncated to a window of
content tokens centered on the target, keeping the tokenizer's special
tokens at both ends; the target always survives (at least its first
subword) or an error names the usage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Usage
from .errors import AlignmentError, DataError, ModelError


@dataclass(frozen=True)
class EncodedUsage:
    """A usage ready for the model: token ids and the target token positions."""

    usage_id: str
    input_ids: list[int]
    target_positions: list[int]


def _sandwich_split(special_mask: list[int]) -> tuple[int, int]:
    """Indices ``(p, s)`` so that positions ``[p, s)`` are the content tokens.

    Requires special tokens only as a prefix and/or suffix (the layout of
    every standard single-sequence template); anything else is unsupported.
    """
    n = len(special_mask)
    p = 0
    while p < n and special_mask[p] == 1:
        p += 1
    s = n
    while s > p and special_mask[s - 1] == 1:
        s -= 1
    if any(special_mask[i] == 1 for i in range(p, s)):
        raise ModelError(
            "unsupported tokenizer template: special tokens interleaved with content"
        )
    return p, s


def encode_usage(tokenizer, usage: Usage, max_len: int) -> EncodedUsage:
    """Tokenize one usage and locate its target subwords, truncating if needed.

    ``max_len`` bounds the final sequence length including special tokens.
    Raises :class:`AlignmentError` if no subword overlaps the target span.
    """
    enc = tokenizer(
        usage.context,
        add_special_tokens=True,
        truncation=False,
        return_offsets_mapping=True,
        return_special_tokens_mask=True,
    )
    ids: list[int] = enc["input_ids"]
    offsets: list[tuple[int, int]] = enc["offset_mapping"]
    special: list[int] = enc["special_tokens_mask"]
    p, s = _sandwich_split(special)

    target = [
        i
        for i in range(p, s)
        if offsets[i][0] < usage.target_end
        and offsets[i][1] > usage.target_start
        and offsets[i][1] > offsets[i][0]
    ]
    if not target:
        raise AlignmentError(
            f"usage {usage.usage_id!r}: target span [{usage.target_start}, "
            f"{usage.target_end}) maps to zero subword tokens"
        )

    n_special = p + (len(ids) - s)
    budget = max_len - n_special
    if budget < 1:
        raise DataError(
            f"max_len {max_len} leaves no room for content tokens "
            f"({n_special} special tokens)"
        )
    m = s - p
    if m <= budget:
        return EncodedUsage(usage.usage_id, list(ids), target)

    # Center a budget-sized window of content tokens on the target span.
    t_lo = target[0] - p
    t_hi = target[-1] - p
    span = t_hi - t_lo + 1
    if span >= budget:
        start = t_lo
    else:
        start = t_lo - (budget - span) // 2
        start = max(0, min(start, m - budget))
    window_ids = ids[:p] + ids[p + start : p + start + budget] + ids[s:]
    window_target = [t - start for t in target if start <= t - p < start + budget]
    return EncodedUsage(usage.usage_id, window_ids, window_target)
