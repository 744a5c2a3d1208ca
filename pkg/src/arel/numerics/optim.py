from __future__ import annotations

import numpy as np

from .autodiff import NumericsError
from .params import ParamStore


class Adam:
    """Adam with bias correction; first/second moments kept per parameter name."""

    def __init__(self, lr: float = 2e-4, betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        if lr < 0:
            raise NumericsError("learning rate must be non-negative")
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, store: ParamStore) -> None:
        self.t += 1
        adam_step(store, self.lr, self.betas, self.eps, self.t, self.m, self.v)


def adam_step(store: ParamStore, lr: float, betas, eps: float, t: int,
              m: dict[str, np.ndarray], v: dict[str, np.ndarray]) -> None:
    """One in-place Adam update at step ``t`` (1-based) using ``store`` gradients."""
    if t < 1:
        raise NumericsError("Adam step counter starts at 1")
    b1, b2 = betas
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for name in store:
        g = store.grad(name)
        if not np.all(np.isfinite(g)):
            raise NumericsError(f"non-finite gradient for {name!r}")
        if name not in m:
            m[name] = np.zeros_like(g)
            v[name] = np.zeros_like(g)
        m[name] *= b1
        m[name] += (1.0 - b1) * g
        v[name] *= b2
        v[name] += (1.0 - b2) * g * g
        if lr == 0.0:
            continue
        p = store.value(name)
        p -= lr * (m[name] / c1) / (np.sqrt(v[name] / c2) + eps)
