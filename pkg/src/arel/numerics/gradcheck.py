from __future__ import annotations

from typing import Callable

import numpy as np

from .autodiff import Tape, Var
from .params import ParamStore


def grad_check(f: Callable[[ParamStore, Tape | None], Var], store: ParamStore,
               n_probes: int = 100, eps: float = 1e-5, seed: int = 0) -> float:
    """Worst relative error between reverse-mode and central-difference gradients.

    ``f(store, tape)`` must build a scalar from ``store.bind(tape)``. Coordinates
    are drawn uniformly (without replacement when possible) from all parameters.
    """
    store.zero_grad()
    tape = Tape()
    out = f(store, tape)
    tape.backward(out)
    analytic = store.flat_grads().copy()
    store.zero_grad()

    rng = np.random.default_rng(seed)
    n = store.size()
    probes = rng.choice(n, size=min(n_probes, n), replace=False)
    worst = 0.0
    for i in probes:
        name, idx = store.locate(int(i))
        p = store.value(name)
        orig = p[idx]
        p[idx] = orig + eps
        fp = float(f(store, None).value)
        p[idx] = orig - eps
        fm = float(f(store, None).value)
        p[idx] = orig
        numeric = (fp - fm) / (2 * eps)
        a = analytic[i]
        err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        worst = max(worst, err)
    return worst
