"""AdamW with decoupled weight decay."""

from __future__ import annotations

import numpy as np

from .layers import Parameter


class AdamW:
    """Adam moment updates plus weight decay applied directly to the weights:

        theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta

    The decay term uses the pre-update weights and never passes through the
    moment estimates.
    """

    def __init__(
        self,
        params: list[Parameter],
        lr: float = 1e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m = [np.zeros_like(p.value) for p in self.params]
        self._v = [np.zeros_like(p.value) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad[...] = 0.0

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / bc1
            v_hat = v / bc2
            p.value -= self.lr * (m_hat / (np.sqrt(v_hat) + self.eps)) + (
                self.lr * self.weight_decay
            ) * p.value
