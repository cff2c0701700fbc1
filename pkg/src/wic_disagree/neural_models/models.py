"""Model architectures over frozen embedding pairs.

* LinearHeadModel: dropout on the plain concatenated features, then a single
  linear layer (4 logits for classification, 1 score for regression).
* AdapterModel: one bottleneck adapter per side producing task-specific
  representations e1', e2'; the MLP head consumes
  [e1' | e2' | e1 | e2 | e1-e2 | e1*e2 | C | E | M] (length 6d+3). The
  comparison slices are computed on the raw embeddings.

Both models take a tuple of row-aligned input arrays prepared by
``prepare_inputs`` so the training loop can slice batches generically.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from ..features import enrich_matrix
from .layers import Dropout, Gelu, LayerNorm, Linear, Parameter


class AdapterBlock:
    """Bottleneck residual block: x + up(dropout(gelu(down(x)))).

    The up-projection starts at zero, so the block is the identity map at
    init and training departs from the frozen embeddings gradually.
    """

    def __init__(self, dim: int, bottleneck: int, dropout: float,
                 rng: np.random.Generator):
        self.down = Linear(dim, bottleneck, rng)
        self.act = Gelu()
        self.drop = Dropout(dropout, rng)
        self.up = Linear(bottleneck, dim, rng, zero_init=True)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        h = self.down.forward(x, train)
        h = self.act.forward(h, train)
        h = self.drop.forward(h, train)
        return x + self.up.forward(h, train)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dh = self.up.backward(dout)
        dh = self.drop.backward(dh)
        dh = self.act.backward(dh)
        return dout + self.down.backward(dh)

    def named_params(self, prefix: str) -> list[tuple[str, Parameter]]:
        return self.down.named_params(f"{prefix}.down") + self.up.named_params(
            f"{prefix}.up"
        )


class MlpHead:
    """Hidden layers of [512, 256] by default, each as layer-norm -> linear ->
    GELU -> dropout, then a final linear layer."""

    def __init__(self, in_dim: int, hidden: tuple[int, ...], out_dim: int,
                 dropout: float, rng: np.random.Generator):
        self.stack = []
        cur = in_dim
        for h in hidden:
            self.stack.append(LayerNorm(cur))
            self.stack.append(Linear(cur, h, rng))
            self.stack.append(Gelu())
            self.stack.append(Dropout(dropout, rng))
            cur = h
        self.final = Linear(cur, out_dim, rng)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        for layer in self.stack:
            x = layer.forward(x, train)
        return self.final.forward(x, train)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dout = self.final.backward(dout)
        for layer in reversed(self.stack):
            dout = layer.backward(dout)
        return dout

    def named_params(self, prefix: str) -> list[tuple[str, Parameter]]:
        out = []
        for i, layer in enumerate(self.stack):
            out.extend(layer.named_params(f"{prefix}.stack{i}"))
        out.extend(self.final.named_params(f"{prefix}.final"))
        return out


class LinearHeadModel:
    """Dropout on the input features followed by one linear layer."""

    kind = "linear_head"

    def __init__(self, in_dim: int, out_dim: int, dropout: float,
                 rng: np.random.Generator):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.drop = Dropout(dropout, rng)
        self.head = Linear(in_dim, out_dim, rng)

    @staticmethod
    def prepare_inputs(E1: np.ndarray, E2: np.ndarray) -> tuple[np.ndarray, ...]:
        return (np.hstack([E1, E2]),)

    def forward(self, inputs: tuple[np.ndarray, ...], train: bool = False) -> np.ndarray:
        (x,) = inputs
        if x.shape[1] != self.in_dim:
            raise DataError(f"expected feature width {self.in_dim}, got {x.shape[1]}")
        return self.head.forward(self.drop.forward(x, train), train)

    def backward(self, dout: np.ndarray) -> None:
        self.drop.backward(self.head.backward(dout))

    def named_params(self) -> list[tuple[str, Parameter]]:
        return self.head.named_params("head")

    def params(self) -> list[Parameter]:
        return [p for _, p in self.named_params()]


class AdapterModel:
    """Two adapter blocks (one per context side) plus an MLP head on the
    adapted-and-enriched features."""

    kind = "adapter"

    def __init__(self, dim: int, out_dim: int, bottleneck: int,
                 hidden: tuple[int, ...], dropout: float,
                 rng: np.random.Generator):
        self.dim = dim
        self.out_dim = out_dim
        self.adapter1 = AdapterBlock(dim, bottleneck, dropout, rng)
        self.adapter2 = AdapterBlock(dim, bottleneck, dropout, rng)
        self.head = MlpHead(6 * dim + 3, hidden, out_dim, dropout, rng)

    @staticmethod
    def prepare_inputs(E1: np.ndarray, E2: np.ndarray) -> tuple[np.ndarray, ...]:
        # third array holds [e1|e2|diff|prod|C|E|M]; the head input prepends
        # the adapted e1', e2'
        return (np.asarray(E1, dtype=np.float64), np.asarray(E2, dtype=np.float64),
                enrich_matrix(E1, E2))

    def forward(self, inputs: tuple[np.ndarray, ...], train: bool = False) -> np.ndarray:
        e1, e2, enriched = inputs
        if e1.shape[1] != self.dim:
            raise DataError(f"expected embedding dim {self.dim}, got {e1.shape[1]}")
        a1 = self.adapter1.forward(e1, train)
        a2 = self.adapter2.forward(e2, train)
        fa = np.hstack([a1, a2, enriched])
        return self.head.forward(fa, train)

    def backward(self, dout: np.ndarray) -> None:
        dfa = self.head.backward(dout)
        d = self.dim
        # embeddings are frozen inputs: only the adapted slices carry gradient
        self.adapter1.backward(dfa[:, :d])
        self.adapter2.backward(dfa[:, d : 2 * d])

    def named_params(self) -> list[tuple[str, Parameter]]:
        return (
            self.adapter1.named_params("adapter1")
            + self.adapter2.named_params("adapter2")
            + self.head.named_params("head")
        )

    def params(self) -> list[Parameter]:
        return [p for _, p in self.named_params()]


def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over the batch; labels are class indices.

    Returns (loss, dlogits).
    """
    if logits.ndim != 2:
        raise DataError("logits must be 2-d (batch, classes)")
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise DataError(
            f"class index out of range for {logits.shape[1]} classes"
        )
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1, keepdims=True)) + logits.max(
        axis=1, keepdims=True
    )
    log_probs = logits - logsumexp
    loss = -log_probs[np.arange(n), labels].mean()
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), labels] -= 1.0
    return float(loss), dlogits / n


def mse_loss(scores: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error for a (batch, 1) score column. Returns (loss, dscores)."""
    s = scores.reshape(-1)
    t = np.asarray(targets, dtype=np.float64).reshape(-1)
    if s.size != t.size:
        raise DataError(f"score/target length mismatch: {s.size} vs {t.size}")
    diff = s - t
    loss = float((diff * diff).mean())
    return loss, (2.0 * diff / s.size).reshape(scores.shape)
