"""Pairwise feature construction for embedding pairs.

Two layouts are produced from a pair (e1, e2) of d-dimensional embeddings:

* plain:    [e1 | e2]                                         length 2d
* enriched: [e1 | e2 | e1-e2 | e1*e2 | cos | euclid | manhattan]  length 4d+3

The difference and product are element-wise; the three scalars are appended
in that fixed order so that trained models are portable across runs.
Distances are computed on the raw embeddings, with 64-bit accumulation for
the scalar reductions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _pair64(e1, e2) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(e1, dtype=np.float64).reshape(-1)
    b = np.asarray(e2, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DataError(f"embedding length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def cosine(e1, e2) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding overshoot."""
    a, b = _pair64(e1, e2)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine undefined for a zero embedding vector")
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


def euclidean(e1, e2) -> float:
    """L2 norm of e1 - e2."""
    a, b = _pair64(e1, e2)
    return float(np.linalg.norm(a - b))


def manhattan(e1, e2) -> float:
    """L1 norm of e1 - e2."""
    a, b = _pair64(e1, e2)
    return float(np.sum(np.abs(a - b)))


@dataclass(frozen=True)
class PairFeatures:
    """A feature vector plus named slices into it.

    ``layout`` maps slice names (e1, e2, and for enriched vectors diff, prod,
    cos, euclid, manhattan) to index slices of ``values``.
    """

    kind: str  # "plain" | "enriched"
    values: np.ndarray
    layout: dict[str, slice]

    def slice(self, name: str) -> np.ndarray:
        return self.values[self.layout[name]]


def plain_layout(d: int) -> dict[str, slice]:
    return {"e1": slice(0, d), "e2": slice(d, 2 * d)}


def enriched_layout(d: int) -> dict[str, slice]:
    return {
        "e1": slice(0, d),
        "e2": slice(d, 2 * d),
        "diff": slice(2 * d, 3 * d),
        "prod": slice(3 * d, 4 * d),
        "cos": slice(4 * d, 4 * d + 1),
        "euclid": slice(4 * d + 1, 4 * d + 2),
        "manhattan": slice(4 * d + 2, 4 * d + 3),
    }


def concat_features(e1, e2) -> PairFeatures:
    """Plain concatenation [e1 | e2], e1 first."""
    a, b = _pair64(e1, e2)
    d = a.shape[0]
    return PairFeatures(kind="plain", values=np.concatenate([a, b]), layout=plain_layout(d))


def enrich_features(e1, e2) -> PairFeatures:
    """Enriched vector [e1 | e2 | e1-e2 | e1*e2 | C | E | M], length 4d+3."""
    a, b = _pair64(e1, e2)
    d = a.shape[0]
    scalars = np.array([cosine(a, b), euclidean(a, b), manhattan(a, b)])
    values = np.concatenate([a, b, a - b, a * b, scalars])
    return PairFeatures(kind="enriched", values=values, layout=enriched_layout(d))


def concat_matrix(E1: np.ndarray, E2: np.ndarray) -> np.ndarray:
    """Row-wise plain features for aligned embedding matrices, shape (n, 2d)."""
    E1, E2 = _matrix_pair(E1, E2)
    return np.hstack([E1, E2])


def enrich_matrix(E1: np.ndarray, E2: np.ndarray) -> np.ndarray:
    """Row-wise enriched features, shape (n, 4d+3)."""
    E1, E2 = _matrix_pair(E1, E2)
    cos = cosine_rows(E1, E2)
    diff = E1 - E2
    euc = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    man = np.sum(np.abs(diff), axis=1)
    return np.hstack([E1, E2, diff, E1 * E2, cos[:, None], euc[:, None], man[:, None]])


def cosine_rows(E1: np.ndarray, E2: np.ndarray) -> np.ndarray:
    """Per-row cosine similarity for aligned matrices, clamped to [-1, 1]."""
    E1, E2 = _matrix_pair(E1, E2)
    n1 = np.linalg.norm(E1, axis=1)
    n2 = np.linalg.norm(E2, axis=1)
    bad = np.flatnonzero((n1 == 0.0) | (n2 == 0.0))
    if bad.size:
        raise DataError(f"cosine undefined for zero embedding vector at row {bad[0]}")
    return np.clip(np.einsum("ij,ij->i", E1, E2) / (n1 * n2), -1.0, 1.0)


def _matrix_pair(E1, E2) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(E1, dtype=np.float64)
    B = np.asarray(E2, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape != B.shape:
        raise DataError(f"embedding matrix shape mismatch: {A.shape} vs {B.shape}")
    return A, B
