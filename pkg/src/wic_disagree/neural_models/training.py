"""Training loop and prediction for the neural heads.

Everything is driven by a single seed: model init, dropout masks and batch
shuffling each consume a sub-stream spawned from it, so the same config and
data produce bit-identical parameter trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, TrainingError
from .models import (
    AdapterModel,
    LinearHeadModel,
    cross_entropy_loss,
    mse_loss,
)
from .optim import AdamW

TASK_OGWIC = "ogwic"
TASK_DISWIC = "diswic"

METHOD_LINEAR = "linear"
METHOD_ADAPTER = "adapter"

# sub-stream ids under the user seed
_STREAM_MODEL = 0
_STREAM_SHUFFLE = 1


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyperparameters (defaults follow the training recipe)."""

    epochs: int = 10
    learning_rate: float = 1e-4
    batch_size: int = 32
    dropout: float = 0.2
    weight_decay: float = 0.01
    bottleneck: int = 64
    hidden: tuple[int, ...] = (512, 256)
    seed: int = 42

    def __post_init__(self):
        if self.epochs < 1:
            raise DataError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate >= 0.0:
            raise DataError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0.0 <= self.dropout < 1.0:
            raise DataError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.bottleneck < 1:
            raise DataError(f"bottleneck must be >= 1, got {self.bottleneck}")


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    dev_metric: float | None = None


@dataclass
class TrainResult:
    model: object
    log: list[EpochLog] = field(default_factory=list)

    def log_tsv(self) -> str:
        lines = ["epoch\ttrain_loss\tdev_metric"]
        for entry in self.log:
            dev = "" if entry.dev_metric is None else f"{entry.dev_metric:.9g}"
            lines.append(f"{entry.epoch}\t{entry.train_loss:.9g}\t{dev}")
        return "\n".join(lines) + "\n"


def make_model(method: str, task: str, dim: int, config: TrainConfig):
    """Build an untrained model with weights drawn from the config seed."""
    out_dim = 4 if task == TASK_OGWIC else 1
    rng = np.random.default_rng([config.seed, _STREAM_MODEL])
    if method == METHOD_LINEAR:
        return LinearHeadModel(2 * dim, out_dim, config.dropout, rng)
    if method == METHOD_ADAPTER:
        return AdapterModel(dim, out_dim, config.bottleneck, config.hidden,
                            config.dropout, rng)
    raise DataError(f"unknown neural method {method!r}")


def _targets_array(task: str, targets) -> np.ndarray:
    if task == TASK_OGWIC:
        labels = np.asarray(targets, dtype=np.int64)
        if labels.size and (labels.min() < 1 or labels.max() > 4):
            raise DataError("OGWiC labels must lie in {1, 2, 3, 4}")
        return labels - 1
    if task == TASK_DISWIC:
        return np.asarray(targets, dtype=np.float64)
    raise DataError(f"unknown task {task!r}")


def train_model(
    model,
    E1: np.ndarray,
    E2: np.ndarray,
    targets,
    task: str,
    config: TrainConfig,
    dev_fn=None,
) -> TrainResult:
    """Run the fixed-epoch training schedule; no early stopping.

    `dev_fn(model) -> float` is called after each epoch when supplied and its
    value recorded in the log (it must not mutate the model).
    """
    n = E1.shape[0]
    if n == 0:
        raise DataError("cannot train on an empty dataset")
    y = _targets_array(task, targets)
    if y.shape[0] != n:
        raise DataError(f"target count {y.shape[0]} != instance count {n}")
    inputs = model.prepare_inputs(E1, E2)
    loss_fn = cross_entropy_loss if task == TASK_OGWIC else mse_loss

    opt = AdamW(model.params(), lr=config.learning_rate,
                weight_decay=config.weight_decay)
    shuffle_rng = np.random.default_rng([config.seed, _STREAM_SHUFFLE])

    log: list[EpochLog] = []
    for epoch in range(1, config.epochs + 1):
        perm = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            out = model.forward(tuple(a[idx] for a in inputs), train=True)
            loss, dout = loss_fn(out, y[idx])
            if not math.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss {loss} at epoch {epoch}, "
                    f"batch starting at {start} (lr={config.learning_rate})"
                )
            opt.zero_grad()
            model.backward(dout)
            opt.step()
            total += loss * idx.size
        entry = EpochLog(epoch=epoch, train_loss=total / n)
        if dev_fn is not None:
            entry.dev_metric = float(dev_fn(model))
        log.append(entry)
    return TrainResult(model=model, log=log)


def predict_model(model, E1: np.ndarray, E2: np.ndarray, task: str,
                  chunk: int = 4096) -> np.ndarray:
    """Eval-mode predictions: labels in {1..4} for OGWiC, raw scores for DisWiC."""
    inputs = model.prepare_inputs(E1, E2)
    n = E1.shape[0]
    outs = []
    for start in range(0, n, chunk):
        batch = tuple(a[start : start + chunk] for a in inputs)
        outs.append(model.forward(batch, train=False))
    out = np.vstack(outs) if outs else np.zeros((0, 1))
    if task == TASK_OGWIC:
        # ties resolve to the lower label because argmax keeps the first max
        return np.argmax(out, axis=1) + 1
    return out.reshape(-1)
