"""Primitive differentiable layers on float64 numpy arrays.

Each layer caches what its backward pass needs during forward; call
``backward`` at most once per forward. Gradients accumulate into
``Parameter.grad`` and are cleared by the optimizer's ``zero_grad``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..errors import DataError

INV_SQRT2 = 1.0 / np.sqrt(2.0)
INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Parameter:
    """A trainable tensor with its gradient accumulator."""

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)


def normal_cdf(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(np.asarray(x) * INV_SQRT2))


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact GELU: x * Phi(x) with Phi the standard normal CDF."""
    x = np.asarray(x, dtype=np.float64)
    return x * normal_cdf(x)


class Gelu:
    """GELU activation layer."""

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        self._x = x
        return gelu(x)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x = self._x
        pdf = INV_SQRT_2PI * np.exp(-0.5 * x * x)
        return dout * (normal_cdf(x) + x * pdf)

    def named_params(self, prefix: str) -> list[tuple[str, Parameter]]:
        return []


class Linear:
    """Affine layer y = x @ W + b, with fan-in uniform init by default."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator,
                 zero_init: bool = False):
        if zero_init:
            w = np.zeros((in_dim, out_dim))
            b = np.zeros(out_dim)
        else:
            bound = 1.0 / np.sqrt(in_dim)
            w = rng.uniform(-bound, bound, size=(in_dim, out_dim))
            b = rng.uniform(-bound, bound, size=out_dim)
        self.W = Parameter(w)
        self.b = Parameter(b)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if x.shape[1] != self.W.value.shape[0]:
            raise DataError(
                f"linear layer expects width {self.W.value.shape[0]}, got {x.shape[1]}"
            )
        self._x = x
        return x @ self.W.value + self.b.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        self.W.grad += self._x.T @ dout
        self.b.grad += dout.sum(axis=0)
        return dout @ self.W.value.T

    def named_params(self, prefix: str) -> list[tuple[str, Parameter]]:
        return [(f"{prefix}.W", self.W), (f"{prefix}.b", self.b)]


class LayerNorm:
    """Per-row normalization to mean 0 / variance 1, then affine (gamma, beta).

    eps is kept tiny (1e-12) because everything runs in float64; this keeps
    the normalized output's variance within 1e-6 of 1 even for small-variance
    rows.
    """

    def __init__(self, dim: int, eps: float = 1e-12):
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))
        self.eps = eps

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        mu = x.mean(axis=1, keepdims=True)
        var = x.var(axis=1, keepdims=True)
        self._inv_std = 1.0 / np.sqrt(var + self.eps)
        self._xhat = (x - mu) * self._inv_std
        return self.gamma.value * self._xhat + self.beta.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        xhat = self._xhat
        g = dout * self.gamma.value
        self.gamma.grad += (dout * xhat).sum(axis=0)
        self.beta.grad += dout.sum(axis=0)
        g_mean = g.mean(axis=1, keepdims=True)
        gx_mean = (g * xhat).mean(axis=1, keepdims=True)
        return self._inv_std * (g - g_mean - xhat * gx_mean)

    def named_params(self, prefix: str) -> list[tuple[str, Parameter]]:
        return [(f"{prefix}.gamma", self.gamma), (f"{prefix}.beta", self.beta)]


class Dropout:
    """Inverted dropout: zero a fraction p and rescale survivors by 1/(1-p).

    Active only when forward is called with train=True; in eval mode the
    layer is the identity.
    """

    def __init__(self, p: float, rng: np.random.Generator):
        if not 0.0 <= p < 1.0:
            raise DataError(f"dropout rate must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train and self.p > 0.0:
            self._scale = (self.rng.random(x.shape) >= self.p) / (1.0 - self.p)
        else:
            self._scale = None
        return x if self._scale is None else x * self._scale

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return dout if self._scale is None else dout * self._scale

    def named_params(self, prefix: str) -> list[tuple[str, Parameter]]:
        return []
