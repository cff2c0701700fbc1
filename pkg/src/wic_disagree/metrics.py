"""Evaluation measures: ordinal Krippendorff's alpha and Spearman's rho.

Alpha treats each (gold, pred) pair as one unit rated by two raters over the
fixed ordinal label domain {1,2,3,4} and uses the cumulative-frequency
ordinal distance. Rho is the Pearson correlation of average ranks (ties get
the mean rank of their block).

Undefined scores (zero expected disagreement, constant series) raise
:class:`UndefinedMetricError` instead of returning a sentinel, so they can
never silently enter cross-language averages.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DataError, UndefinedMetricError

N_LABELS = 4


def _checked_labels(values: Sequence[int], name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError(f"{name}: expected a non-empty 1-d label sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise DataError(f"{name}: labels must be integers in {{1..4}}")
        arr = arr.astype(np.int64)
    if arr.min() < 1 or arr.max() > N_LABELS:
        raise DataError(f"{name}: labels must be in {{1..4}}")
    return arr.astype(np.int64)


def joint_label_counts(gold: Sequence[int], pred: Sequence[int]) -> np.ndarray:
    """4x4 contingency counts J[g-1, p-1] of (gold, pred) label pairs."""
    g = _checked_labels(gold, "gold")
    p = _checked_labels(pred, "pred")
    if g.shape != p.shape:
        raise DataError(f"gold/pred length mismatch: {g.size} vs {p.size}")
    joint = np.zeros((N_LABELS, N_LABELS), dtype=np.float64)
    np.add.at(joint, (g - 1, p - 1), 1.0)
    return joint


def alpha_from_joint_batch(joint: np.ndarray) -> np.ndarray:
    """Ordinal alpha for a batch of 4x4 (gold, pred) contingency matrices.

    Returns NaN where the expected disagreement is zero (all pooled values
    identical). Shape (m, 4, 4) -> (m,).
    """
    J = np.asarray(joint, dtype=np.float64)
    if J.ndim == 2:
        J = J[None]
    # coincidence matrix: each unit contributes (g,p) and (p,g)
    o = J + np.swapaxes(J, 1, 2)
    n_c = o.sum(axis=2)  # label frequencies over the 2n pooled values
    n_tot = n_c.sum(axis=1)  # 2n

    cum = np.cumsum(n_c, axis=1)
    # S[c,k] = sum of frequencies from label c through k (valid for c <= k)
    S = cum[:, None, :] - cum[:, :, None] + n_c[:, :, None]
    delta2 = (S - (n_c[:, :, None] + n_c[:, None, :]) / 2.0) ** 2
    upper = np.triu(np.ones((N_LABELS, N_LABELS)), k=1)
    delta2 = delta2 * upper
    delta2 = delta2 + np.swapaxes(delta2, 1, 2)

    d_obs = (o * delta2).sum(axis=(1, 2)) / n_tot
    d_exp = (n_c[:, :, None] * n_c[:, None, :] * delta2).sum(axis=(1, 2)) / (
        n_tot * (n_tot - 1.0)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(d_exp > 0.0, 1.0 - d_obs / d_exp, np.nan)
    return alpha


def krippendorff_alpha_ordinal(gold: Sequence[int], pred: Sequence[int]) -> float:
    """Ordinal Krippendorff's alpha of predictions against gold labels.

    Equals 1.0 exactly for perfect agreement; can be negative for worse than
    chance. Raises :class:`UndefinedMetricError` when all 2n pooled values are
    identical (zero expected disagreement).
    """
    joint = joint_label_counts(gold, pred)
    alpha = float(alpha_from_joint_batch(joint)[0])
    if np.isnan(alpha):
        raise UndefinedMetricError(
            "alpha undefined: all gold and predicted labels are identical "
            "(zero expected disagreement)"
        )
    return alpha


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values receive the mean rank of their tie block."""
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise DataError("cannot rank an empty sequence")
    if np.any(np.isnan(a)):
        raise DataError("cannot rank a sequence containing NaN")
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    starts = np.r_[True, sorted_a[1:] != sorted_a[:-1]]
    block = np.cumsum(starts) - 1
    counts = np.bincount(block)
    firsts = np.r_[0, np.cumsum(counts)[:-1]]
    block_rank = firsts + (counts - 1) / 2.0 + 1.0
    ranks = np.empty(a.size, dtype=np.float64)
    ranks[order] = block_rank[block]
    return ranks


def spearman_rho(gold: Sequence[float], pred: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    g = np.asarray(gold, dtype=np.float64).reshape(-1)
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    if g.size != p.size:
        raise DataError(f"gold/pred length mismatch: {g.size} vs {p.size}")
    if g.size < 2:
        raise DataError("rho requires at least 2 items")
    if np.unique(g).size < 2 or np.unique(p).size < 2:
        raise UndefinedMetricError("rho undefined: constant series has no ranking")
    rg = average_ranks(g)
    rp = average_ranks(p)
    xc = rg - rg.mean()
    yc = rp - rp.mean()
    return float((xc @ yc) / np.sqrt((xc @ xc) * (yc @ yc)))
