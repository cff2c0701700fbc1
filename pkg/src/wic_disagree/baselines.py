"""Organizer-style baselines: alpha-optimized cosine binning and ridge regression.

The binning baseline partitions cosine similarity into the four ordinal
labels with three thresholds t1 < t2 < t3 (boundary values fall into the
lower bin) chosen to maximize training-set ordinal alpha over a candidate
grid. The regression baseline is least squares with a small ridge penalty on
plain concatenated features.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .metrics import N_LABELS, alpha_from_joint_batch

MAX_DISTINCT_FOR_EXHAUSTIVE = 400


@dataclass(frozen=True)
class BinThresholds:
    """Three strictly increasing cut points plus the training alpha they achieved."""

    t1: float
    t2: float
    t3: float
    alpha: float

    def __post_init__(self) -> None:
        if not (self.t1 < self.t2 < self.t3):
            raise DataError(f"thresholds must be strictly increasing, got {self}")


def apply_bins(similarity, thresholds: BinThresholds):
    """Map similarity to a label in {1..4}; boundary values go to the lower bin.

    Accepts a scalar or an array and returns the matching shape.
    """
    sim = np.asarray(similarity, dtype=np.float64)
    if np.any(np.isnan(sim)):
        raise DataError("cannot bin NaN similarity")
    cuts = np.array([thresholds.t1, thresholds.t2, thresholds.t3])
    # label = 1 + number of cuts strictly below sim, so sim == t_i stays in
    # the lower bin
    labels = 1 + np.searchsorted(cuts, sim, side="left")
    if labels.ndim == 0:
        return int(labels)
    return labels.astype(np.int64)


def candidate_thresholds(similarities: np.ndarray) -> np.ndarray:
    """Candidate cut points for the grid search.

    Midpoints between consecutive distinct sorted similarities; when more
    than 400 distinct values exist, 400 quantile-spaced candidates are used
    instead to bound the O(m^3) search.
    """
    distinct = np.unique(np.asarray(similarities, dtype=np.float64))
    if distinct.size <= MAX_DISTINCT_FOR_EXHAUSTIVE:
        return (distinct[:-1] + distinct[1:]) / 2.0
    probs = np.linspace(0.0, 1.0, MAX_DISTINCT_FOR_EXHAUSTIVE + 2)[1:-1]
    return np.unique(np.quantile(distinct, probs))


def optimize_bins(
    similarities: Sequence[float], gold_medians: Sequence[int]
) -> BinThresholds:
    """Exhaustive search for the alpha-maximizing threshold triple.

    Evaluates every increasing triple of candidate thresholds and returns the
    one with the highest training-set ordinal alpha; ties break to the
    lexicographically smallest (t1, t2, t3) for determinism.
    """
    sims = np.asarray(similarities, dtype=np.float64).reshape(-1)
    gold = np.asarray(gold_medians, dtype=np.int64).reshape(-1)
    if sims.size != gold.size:
        raise DataError(f"similarities/gold length mismatch: {sims.size} vs {gold.size}")
    if sims.size < 4:
        raise DataError("bin optimization requires at least 4 instances")
    if np.any(np.isnan(sims)):
        raise DataError("NaN similarity in bin optimization input")
    if gold.min() < 1 or gold.max() > N_LABELS:
        raise DataError("gold medians must be in {1..4}")
    if np.unique(gold).size < 2:
        raise DataError("bin optimization undefined: gold labels span a single class")

    cands = candidate_thresholds(sims)
    if cands.size < 3:
        raise DataError(
            f"bin optimization needs >= 3 distinct candidate thresholds, got {cands.size}"
        )

    order = np.argsort(sims, kind="mergesort")
    gold_sorted = gold[order]
    sims_sorted = sims[order]
    n = sims.size

    # pos[j] = number of items with similarity <= candidate j
    pos = np.searchsorted(sims_sorted, cands, side="right")
    # candidates that induce the same split position are interchangeable for
    # alpha; keep the smallest threshold of each group (tie-break order)
    keep = np.r_[True, pos[1:] != pos[:-1]]
    cands = cands[keep]
    pos = pos[keep]
    m = cands.size
    if m < 3:
        raise DataError("bin optimization: fewer than 3 effective candidate thresholds")

    # prefix[g, i] = count of gold label g+1 among the i lowest-similarity items
    prefix = np.zeros((N_LABELS, n + 1), dtype=np.float64)
    for g in range(N_LABELS):
        prefix[g, 1:] = np.cumsum(gold_sorted == g + 1)
    at_cand = prefix[:, pos]  # (4, m)
    totals = prefix[:, n]  # (4,)

    pair_i2, pair_i3 = np.triu_indices(m, k=1)
    # pairs are in lexicographic (i2, i3) order; pairs with i2 >= k start at
    # pair_offset[k]
    counts_per_first = m - 1 - np.arange(m)
    pair_offset = np.r_[0, np.cumsum(counts_per_first)]

    best_alpha = -np.inf
    best_triple = (-1, -1, -1)
    for i1 in range(m - 2):
        lo = pair_offset[i1 + 1]
        i2 = pair_i2[lo:]
        i3 = pair_i3[lo:]
        b = i2.size
        joint = np.empty((b, N_LABELS, 4), dtype=np.float64)
        c1 = at_cand[:, i1]  # (4,)
        c2 = at_cand[:, i2]  # (4, b)
        c3 = at_cand[:, i3]
        joint[:, :, 0] = c1[None, :]
        joint[:, :, 1] = (c2 - c1[:, None]).T
        joint[:, :, 2] = (c3 - c2).T
        joint[:, :, 3] = (totals[:, None] - c3).T
        alphas = alpha_from_joint_batch(joint)
        k = int(np.argmax(alphas))
        if alphas[k] > best_alpha:
            best_alpha = float(alphas[k])
            best_triple = (i1, int(i2[k]), int(i3[k]))

    j1, j2, j3 = best_triple
    return BinThresholds(
        t1=float(cands[j1]), t2=float(cands[j2]), t3=float(cands[j3]), alpha=best_alpha
    )


@dataclass(frozen=True)
class LinearModel:
    """Affine map: prediction = X @ weights + bias."""

    weights: np.ndarray
    bias: float


def fit_linreg(X: np.ndarray, y: np.ndarray, ridge_lambda: float = 1e-6) -> LinearModel:
    """Least squares with ridge penalty on the weights (bias unpenalized).

    Solves the normal equations directly; a singular system with
    ridge_lambda = 0 raises :class:`DataError` suggesting a nonzero lambda.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DataError(f"feature matrix {X.shape} does not match {y.size} targets")
    if X.shape[0] < 1:
        raise DataError("cannot fit linear regression on zero rows")
    if ridge_lambda < 0:
        raise DataError("ridge lambda must be non-negative")
    n, p = X.shape
    A = np.empty((p + 1, p + 1), dtype=np.float64)
    A[:p, :p] = X.T @ X + ridge_lambda * np.eye(p)
    col = X.sum(axis=0)
    A[:p, p] = col
    A[p, :p] = col
    A[p, p] = n
    rhs = np.empty(p + 1, dtype=np.float64)
    rhs[:p] = X.T @ y
    rhs[p] = y.sum()
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise DataError(
            "singular normal equations; refit with a nonzero ridge lambda"
        ) from exc
    if not np.all(np.isfinite(sol)):
        raise DataError(
            "ill-conditioned normal equations; refit with a larger ridge lambda"
        )
    return LinearModel(weights=sol[:p], bias=float(sol[p]))


def predict_linreg(model: LinearModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.weights.size:
        raise DataError(
            f"feature width {X.shape[1] if X.ndim == 2 else '?'} does not match "
            f"model width {model.weights.size}"
        )
    return X @ model.weights + model.bias


def save_thresholds(thresholds: BinThresholds, path: str | Path) -> None:
    payload = {
        "t1": thresholds.t1,
        "t2": thresholds.t2,
        "t3": thresholds.t3,
        "alpha": thresholds.alpha,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_thresholds(path: str | Path) -> BinThresholds:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return BinThresholds(
            t1=payload["t1"], t2=payload["t2"], t3=payload["t3"], alpha=payload["alpha"]
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing threshold key {exc}") from exc


def save_linear(model: LinearModel, path: str | Path) -> None:
    payload = {"bias": model.bias, "weights": [float(w) for w in model.weights]}
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_linear(path: str | Path) -> LinearModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return LinearModel(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing linear model key {exc}") from exc
