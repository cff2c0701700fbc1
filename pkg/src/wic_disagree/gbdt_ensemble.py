"""Gradient-boosted decision trees over enriched pair features.

One first-order boosting engine serves both tasks: stagewise least-squares
regression on residuals for disagreement scores, and one-tree-per-class
multiclass logistic boosting on softmax gradients for ordinal labels. Two
configured variants ("C" with full columns, "X" with 0.8 column subsampling)
are combined per task with fixed weights: probability vectors mixed
0.4/0.3 then argmax for labels, scores averaged 0.4/0.6 for regression.

Splits are exact greedy least-squares splits over midpoints of consecutive
distinct feature values — no histogram or quantile approximation — so small
fixtures can be checked against a brute-force oracle.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DataError, FormatError

N_CLASSES = 4

OGWIC_WEIGHTS = (0.4, 0.3)
DISWIC_WEIGHTS = (0.4, 0.6)

MAGIC = b"WICT"
VERSION = 1

_HEADER = struct.Struct("<4sH")
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class GbdtConfig:
    """Boosting hyperparameters; depth counts edges from the root."""

    learning_rate: float = 0.05
    max_depth: int = 6
    n_rounds: int = 500
    colsample: float = 1.0
    min_samples_leaf: int = 1
    seed: int = 42

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise DataError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_depth < 1:
            raise DataError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.n_rounds < 0:
            raise DataError(f"n_rounds must be >= 0, got {self.n_rounds}")
        if not 0.0 < self.colsample <= 1.0:
            raise DataError(f"colsample must be in (0, 1], got {self.colsample}")
        if self.min_samples_leaf < 1:
            raise DataError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )

    @classmethod
    def variant_c(cls, **overrides) -> "GbdtConfig":
        overrides.setdefault("colsample", 1.0)
        return cls(**overrides)

    @classmethod
    def variant_x(cls, **overrides) -> "GbdtConfig":
        overrides.setdefault("colsample", 0.8)
        return cls(**overrides)


@dataclass
class Tree:
    """Binary tree in preorder arrays; leaves have feature -1 and self-loop."""

    feature: np.ndarray  # int32, -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32 child indices
    right: np.ndarray
    value: np.ndarray  # float64 leaf values (0 on internal nodes)

    def predict(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        rows = np.arange(n)
        while True:
            feat = self.feature[node]
            if not (feat >= 0).any():
                break
            xv = X[rows, np.maximum(feat, 0)]
            go_left = xv <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            # leaves self-loop, so only internal nodes actually advance
            node = np.where(feat >= 0, nxt, node)
        return self.value[node]


@dataclass
class GbdtModel:
    task: str  # "ogwic" (classification) or "diswic" (regression)
    n_features: int
    init: np.ndarray  # shape () for regression, (4,) for classification
    config: GbdtConfig
    trees: list[Tree] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)

    @property
    def is_classifier(self) -> bool:
        return self.task == "ogwic"


def _draw_features(rng: np.random.Generator, n_features: int, rate: float) -> np.ndarray:
    k = math.ceil(rate * n_features)
    if k >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=k, replace=False))


def _best_split(X, residual, idx, feats, min_samples_leaf):
    """Exact greedy split on SSE reduction.

    Ties break to the lowest feature index, then the lowest threshold; both
    fall out of numpy's first-maximum argmax because rows are sorted by value
    and `feats` is ascending.
    """
    m = idx.size
    Xn = X[np.ix_(idx, feats)]
    res = residual[idx]
    order = np.argsort(Xn, axis=0, kind="stable")
    Xs = np.take_along_axis(Xn, order, axis=0)
    ys = res[order]
    cum = np.cumsum(ys, axis=0)
    total = cum[-1]

    k = np.arange(1, m, dtype=np.float64)
    left_sum = cum[:-1]
    right_sum = total[None, :] - left_sum
    gains = left_sum**2 / k[:, None] + right_sum**2 / (m - k)[:, None]
    valid = Xs[1:] > Xs[:-1]
    if min_samples_leaf > 1:
        ok = (k >= min_samples_leaf) & (m - k >= min_samples_leaf)
        valid &= ok[:, None]
    gains = np.where(valid, gains, -np.inf)

    row = np.argmax(gains, axis=0)
    col_best = gains[row, np.arange(gains.shape[1])]
    j = int(np.argmax(col_best))
    best = col_best[j]
    if not np.isfinite(best) or best - total[j] ** 2 / m <= 0.0:
        return None
    lo = Xs[row[j], j]
    hi = Xs[row[j] + 1, j]
    thr = (lo + hi) / 2.0
    if thr >= hi:  # adjacent floats: midpoint rounded up would not separate
        thr = lo
    feat = int(feats[j])
    go_left = X[idx, feat] <= thr
    return feat, float(thr), idx[go_left], idx[~go_left]


def _build_tree(X, residual, feats, config: GbdtConfig) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def rec(idx: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(node)
        right.append(node)
        value.append(0.0)
        res_node = residual[idx]
        if (
            depth < config.max_depth
            and idx.size >= 2 * config.min_samples_leaf
            and idx.size >= 2
            and not np.all(res_node == res_node[0])
        ):
            split = _best_split(X, residual, idx, feats, config.min_samples_leaf)
            if split is not None:
                feat, thr, left_idx, right_idx = split
                feature[node] = feat
                threshold[node] = thr
                left[node] = rec(left_idx, depth + 1)
                right[node] = rec(right_idx, depth + 1)
                return node
        value[node] = float(res_node.mean())
        return node

    rec(np.arange(X.shape[0]), 0)
    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
    )


def _softmax(F: np.ndarray) -> np.ndarray:
    shifted = F - F.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):  # -inf - -inf on impossible classes
        e = np.exp(shifted)
    e = np.nan_to_num(e, nan=0.0)
    return e / e.sum(axis=1, keepdims=True)


def _log_loss(P: np.ndarray, class_idx: np.ndarray) -> float:
    p_true = np.clip(P[np.arange(P.shape[0]), class_idx], 1e-300, None)
    return float(-np.log(p_true).mean())


def fit_gbdt(X: np.ndarray, y, task: str, config: GbdtConfig) -> GbdtModel:
    """Boost `n_rounds` rounds; records the training loss after init and
    after every round (MSE for regression, multiclass log-loss otherwise)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("need a 2-d feature matrix with at least 2 rows")
    n, p = X.shape
    rng = np.random.default_rng(config.seed)

    if task == "diswic":
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (n,):
            raise DataError(f"target shape {y.shape} != ({n},)")
        init = y.mean()
        model = GbdtModel(task=task, n_features=p,
                          init=np.asarray(init, dtype=np.float64), config=config)
        F = np.full(n, init)
        model.train_loss.append(float(((y - F) ** 2).mean()))
        for _ in range(config.n_rounds):
            feats = _draw_features(rng, p, config.colsample)
            tree = _build_tree(X, y - F, feats, config)
            F += config.learning_rate * tree.predict(X)
            model.trees.append(tree)
            model.train_loss.append(float(((y - F) ** 2).mean()))
        return model

    if task == "ogwic":
        labels = np.asarray(y, dtype=np.int64)
        if labels.shape != (n,):
            raise DataError(f"target shape {labels.shape} != ({n},)")
        if labels.min() < 1 or labels.max() > N_CLASSES:
            raise DataError("labels must lie in {1, 2, 3, 4}")
        cls = labels - 1
        onehot = np.zeros((n, N_CLASSES))
        onehot[np.arange(n), cls] = 1.0
        counts = onehot.sum(axis=0)
        with np.errstate(divide="ignore"):
            init = np.where(counts > 0, np.log(counts / n), -np.inf)
        model = GbdtModel(task=task, n_features=p, init=init, config=config)
        F = np.tile(init, (n, 1))
        model.train_loss.append(_log_loss(_softmax(F), cls))
        for _ in range(config.n_rounds):
            grad = onehot - _softmax(F)  # negative log-loss gradient
            for c in range(N_CLASSES):
                feats = _draw_features(rng, p, config.colsample)
                tree = _build_tree(X, grad[:, c], feats, config)
                F[:, c] += config.learning_rate * tree.predict(X)
                model.trees.append(tree)
            model.train_loss.append(_log_loss(_softmax(F), cls))
        return model

    raise DataError(f"unknown task {task!r}")


def predict_gbdt(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    """Regression: scores (n,). Classification: probability vectors (n, 4)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DataError(
            f"feature width {X.shape[1] if X.ndim == 2 else '?'} != "
            f"model width {model.n_features}"
        )
    n = X.shape[0]
    lr = model.config.learning_rate
    if model.is_classifier:
        F = np.tile(model.init, (n, 1))
        for i, tree in enumerate(model.trees):
            F[:, i % N_CLASSES] += lr * tree.predict(X)
        return _softmax(F)
    F = np.full(n, float(model.init))
    for tree in model.trees:
        F += lr * tree.predict(X)
    return F


def combine(pred_c: np.ndarray, pred_x: np.ndarray, task: str) -> np.ndarray:
    """Mix the two variants: weighted probabilities then argmax for labels
    (ties to the lower label), weighted score average for regression."""
    pred_c = np.asarray(pred_c, dtype=np.float64)
    pred_x = np.asarray(pred_x, dtype=np.float64)
    if pred_c.shape != pred_x.shape:
        raise DataError(
            f"prediction shapes differ: {pred_c.shape} vs {pred_x.shape}"
        )
    if task == "ogwic":
        if pred_c.ndim != 2 or pred_c.shape[1] != N_CLASSES:
            raise DataError("label combination expects (n, 4) probability arrays")
        w_c, w_x = OGWIC_WEIGHTS
        mixed = w_c * pred_c + w_x * pred_x
        return np.argmax(mixed, axis=1) + 1  # first max -> lower label
    if task == "diswic":
        w_c, w_x = DISWIC_WEIGHTS
        return w_c * pred_c + w_x * pred_x
    raise DataError(f"unknown task {task!r}")


def save_gbdt(path, model: GbdtModel) -> None:
    meta = {
        "task": model.task,
        "n_features": model.n_features,
        "init": np.atleast_1d(model.init).tolist(),
        "config": asdict(model.config),
        "n_trees": len(model.trees),
        "train_loss": model.train_loss,
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION))
        fh.write(_U32.pack(len(blob)))
        fh.write(blob)
        for tree in model.trees:
            fh.write(_U32.pack(tree.feature.size))
            fh.write(tree.feature.astype("<i4").tobytes())
            fh.write(tree.threshold.astype("<f8").tobytes())
            fh.write(tree.left.astype("<i4").tobytes())
            fh.write(tree.right.astype("<i4").tobytes())
            fh.write(tree.value.astype("<f8").tobytes())


def load_gbdt(path) -> GbdtModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size + _U32.size:
        raise FormatError(f"{path}: truncated model header")
    magic, version = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    (blob_len,) = _U32.unpack_from(data, _HEADER.size)
    off = _HEADER.size + _U32.size
    if off + blob_len > len(data):
        raise FormatError(f"{path}: truncated config blob")
    try:
        meta = json.loads(data[off : off + blob_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable config blob: {exc}") from exc
    off += blob_len

    init = np.asarray(meta["init"], dtype=np.float64)
    if meta["task"] == "diswic":
        init = init.reshape(())
    model = GbdtModel(
        task=meta["task"],
        n_features=int(meta["n_features"]),
        init=init,
        config=GbdtConfig(**meta["config"]),
        train_loss=[float(v) for v in meta["train_loss"]],
    )
    for t in range(int(meta["n_trees"])):
        if off + _U32.size > len(data):
            raise FormatError(f"{path}: truncated tree {t} at byte {off}")
        (n_nodes,) = _U32.unpack_from(data, off)
        off += _U32.size
        arrays = []
        for dtype, width in (("<i4", 4), ("<f8", 8), ("<i4", 4), ("<i4", 4), ("<f8", 8)):
            nbytes = n_nodes * width
            if off + nbytes > len(data):
                raise FormatError(f"{path}: truncated tree {t} at byte {off}")
            arrays.append(np.frombuffer(data, dtype=dtype, count=n_nodes, offset=off).copy())
            off += nbytes
        feature, threshold, left, right, value = arrays
        model.trees.append(Tree(feature=feature, threshold=threshold,
                                left=left, right=right, value=value))
    if off != len(data):
        raise FormatError(f"{path}: {len(data) - off} trailing bytes after trees")
    return model
