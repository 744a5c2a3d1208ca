"""Tape-based reverse-mode differentiation over numpy arrays.

Every primitive below takes ``Var`` inputs (or plain arrays, which are treated
as constants) and returns a ``Var``. When any input carries a tape the output
carries it too and a backward closure is appended to the tape. ``Tape.backward``
replays the closures in exact reverse order of recording.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class NumericsError(ValueError):
    """Raised on shape mismatches and non-finite values."""


class Var:
    __slots__ = ("value", "grad", "tape")

    def __init__(self, value, tape: "Tape | None" = None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.tape = tape

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Var(shape={self.value.shape}, tracked={self.tape is not None})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, idx):
        return getitem(self, idx)


class Tape:
    """Ordered record of backward closures."""

    def __init__(self):
        self._records: list[Callable[[], None]] = []

    def __len__(self) -> int:
        return len(self._records)

    def record(self, fn: Callable[[], None]) -> None:
        self._records.append(fn)

    def clear(self) -> None:
        self._records.clear()

    def param(self, store, name: str) -> Var:
        v = Var.__new__(Var)
        v.value = store.value(name)
        v.grad = store.grad(name)
        v.tape = self
        return v

    def backward(self, out: Var, seed=None) -> None:
        """Accumulate d(out)/d(leaf) into every tracked leaf's grad buffer.

        ``seed`` defaults to ones (so a scalar output gets gradient 1). The tape
        is cleared afterwards; intermediate grads are not reusable.
        """
        if out.tape is not self:
            raise NumericsError("output was not recorded on this tape")
        g = np.ones_like(out.value) if seed is None else np.asarray(seed, dtype=np.float64)
        if g.shape != out.value.shape:
            raise NumericsError(f"seed shape {g.shape} != output shape {out.value.shape}")
        _acc(out, g)
        for fn in reversed(self._records):
            fn()
        self._records.clear()


def const(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def _tape_of(*vs: Var) -> Tape | None:
    for v in vs:
        if v.tape is not None:
            return v.tape
    return None


def _acc(v: Var, g: np.ndarray) -> None:
    if v.tape is None:
        return
    if v.grad is None:
        v.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        v.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _out(value: np.ndarray, tape: Tape | None) -> Var:
    v = Var.__new__(Var)
    v.value = value
    v.grad = None
    v.tape = tape
    return v


def check_finite(x: np.ndarray, what: str = "value") -> None:
    if not np.all(np.isfinite(x)):
        raise NumericsError(f"non-finite {what}")


# ----------------------------------------------------------------------------
# elementwise
# ----------------------------------------------------------------------------


def add(a, b) -> Var:
    a, b = const(a), const(b)
    tape = _tape_of(a, b)
    out = _out(a.value + b.value, tape)
    if tape is not None:
        def back():
            if out.grad is None:
                return
            _acc(a, _unbroadcast(out.grad, a.shape))
            _acc(b, _unbroadcast(out.grad, b.shape))
        tape.record(back)
    return out


def sub(a, b) -> Var:
    a, b = const(a), const(b)
    tape = _tape_of(a, b)
    out = _out(a.value - b.value, tape)
    if tape is not None:
        def back():
            if out.grad is None:
                return
            _acc(a, _unbroadcast(out.grad, a.shape))
            _acc(b, _unbroadcast(-out.grad, b.shape))
        tape.record(back)
    return out


def mul(a, b) -> Var:
    a, b = const(a), const(b)
    tape = _tape_of(a, b)
    out = _out(a.value * b.value, tape)
    if tape is not None:
        def back():
            if out.grad is None:
                return
            if a.tape is not None:
                _acc(a, _unbroadcast(out.grad * b.value, a.shape))
            if b.tape is not None:
                _acc(b, _unbroadcast(out.grad * a.value, b.shape))
        tape.record(back)
    return out


def _unary(a, value: np.ndarray, dydx: Callable[[], np.ndarray]) -> Var:
    tape = a.tape
    out = _out(value, tape)
    if tape is not None:
        def back():
            if out.grad is not None:
                _acc(a, out.grad * dydx())
        tape.record(back)
    return out


def sigmoid(a) -> Var:
    a = const(a)
    # tanh form avoids overflow in exp for large |x|
    y = 0.5 * (np.tanh(0.5 * a.value) + 1.0)
    return _unary(a, y, lambda: y * (1.0 - y))


# largest double below 1: keeps bounded activations strictly inside (-1, 1)
_BELOW_ONE = np.nextafter(1.0, 0.0)


def tanh(a) -> Var:
    a = const(a)
    y = np.clip(np.tanh(a.value), -_BELOW_ONE, _BELOW_ONE)
    return _unary(a, y, lambda: 1.0 - y * y)


def softsign(a) -> Var:
    a = const(a)
    d = 1.0 + np.abs(a.value)
    y = np.clip(a.value / d, -_BELOW_ONE, _BELOW_ONE)
    return _unary(a, y, lambda: 1.0 / (d * d))


def exp(a) -> Var:
    a = const(a)
    y = np.exp(a.value)
    return _unary(a, y, lambda: y)


def log_sigmoid(a) -> Var:
    a = const(a)
    x = a.value
    y = np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))
    return _unary(a, y, lambda: 1.0 - 0.5 * (np.tanh(0.5 * x) + 1.0))


# ----------------------------------------------------------------------------
# linear algebra and shape ops
# ----------------------------------------------------------------------------


def linear(x, w, b=None) -> Var:
    """``x @ w.T + b`` for x of shape (..., n_in) and w of shape (n_out, n_in)."""
    x, w = const(x), const(w)
    if x.shape[-1] != w.shape[1]:
        raise NumericsError(f"linear: input dim {x.shape[-1]} != weight dim {w.shape[1]}")
    y = x.value @ w.value.T
    if b is not None:
        b = const(b)
        if b.shape != (w.shape[0],):
            raise NumericsError(f"linear: bias shape {b.shape} != ({w.shape[0]},)")
        y = y + b.value
    tape = _tape_of(x, w) if b is None else _tape_of(x, w, b)
    out = _out(y, tape)
    if tape is not None:
        def back():
            g = out.grad
            if g is None:
                return
            if x.tape is not None:
                _acc(x, g @ w.value)
            g2 = g.reshape(-1, g.shape[-1])
            if w.tape is not None:
                _acc(w, g2.T @ x.value.reshape(-1, x.shape[-1]))
            if b is not None and b.tape is not None:
                _acc(b, g2.sum(axis=0))
        tape.record(back)
    return out


def concat(xs: Sequence, axis: int = -1) -> Var:
    xs = [const(x) for x in xs]
    tape = _tape_of(*xs)
    out = _out(np.concatenate([x.value for x in xs], axis=axis), tape)
    if tape is not None:
        ax = axis % out.value.ndim
        bounds = np.cumsum([x.shape[ax] for x in xs])[:-1]

        def back():
            if out.grad is None:
                return
            for x, g in zip(xs, np.split(out.grad, bounds, axis=ax)):
                _acc(x, g)
        tape.record(back)
    return out


def stack(xs: Sequence, axis: int = 0) -> Var:
    xs = [const(x) for x in xs]
    tape = _tape_of(*xs)
    out = _out(np.stack([x.value for x in xs], axis=axis), tape)
    if tape is not None:
        def back():
            if out.grad is None:
                return
            for i, x in enumerate(xs):
                _acc(x, np.take(out.grad, i, axis=axis))
        tape.record(back)
    return out


def getitem(a, idx) -> Var:
    a = const(a)
    out = _out(a.value[idx], a.tape)
    if a.tape is not None:
        def back():
            if out.grad is None:
                return
            g = np.zeros_like(a.value)
            np.add.at(g, idx, out.grad)
            _acc(a, g)
        a.tape.record(back)
    return out


def reshape(a, shape) -> Var:
    a = const(a)
    out = _out(a.value.reshape(shape), a.tape)
    if a.tape is not None:
        def back():
            if out.grad is not None:
                _acc(a, out.grad.reshape(a.shape))
        a.tape.record(back)
    return out


def take_rows(table, ids) -> Var:
    """Embedding lookup: ``table[ids]`` with scatter-add backward."""
    table = const(table)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise NumericsError("take_rows: id out of range")
    out = _out(table.value[ids], table.tape)
    if table.tape is not None:
        def back():
            if out.grad is None:
                return
            g = np.zeros_like(table.value)
            np.add.at(g, ids.reshape(-1), out.grad.reshape(-1, table.shape[1]))
            _acc(table, g)
        table.tape.record(back)
    return out


def total(a, weights=None) -> Var:
    """Scalar ``sum(a * weights)``; weights are constants."""
    a = const(a)
    w = None if weights is None else np.broadcast_to(np.asarray(weights, dtype=np.float64), a.shape)
    out = _out(np.asarray(a.value.sum() if w is None else (a.value * w).sum()), a.tape)
    if a.tape is not None:
        def back():
            if out.grad is None:
                return
            g = out.grad * (np.ones_like(a.value) if w is None else w)
            _acc(a, g)
        a.tape.record(back)
    return out


# ----------------------------------------------------------------------------
# sequence ops
# ----------------------------------------------------------------------------


def unfold(x, k: int) -> Var:
    """Sliding windows over axis 1: (S, T, E) -> (S, T-k+1, k*E)."""
    x = const(x)
    s, t, e = x.shape
    if t < k:
        raise NumericsError(f"unfold: length {t} < window {k}")
    p = t - k + 1
    cols = np.arange(p)[:, None] + np.arange(k)[None, :]
    out = _out(x.value[:, cols, :].reshape(s, p, k * e), x.tape)
    if x.tape is not None:
        def back():
            if out.grad is None:
                return
            g = np.zeros_like(x.value)
            gw = out.grad.reshape(s, p, k, e)
            for j in range(k):
                g[:, j:j + p, :] += gw[:, :, j, :]
            _acc(x, g)
        x.tape.record(back)
    return out


def maxpool_pairs(x) -> Var:
    """Max-pool window 2 stride 2 along axis 1 of (S, P, F); an odd tail passes through."""
    x = const(x)
    s, p, f = x.shape
    q = (p + 1) // 2
    padded = x.value
    if p % 2:
        padded = np.concatenate([padded, np.full((s, 1, f), -np.inf)], axis=1)
    pairs = padded.reshape(s, q, 2, f)
    arg = np.argmax(pairs, axis=2)
    out = _out(np.take_along_axis(pairs, arg[:, :, None, :], axis=2)[:, :, 0, :], x.tape)
    if x.tape is not None:
        def back():
            if out.grad is None:
                return
            g = np.zeros((s, q, 2, f))
            np.put_along_axis(g, arg[:, :, None, :], out.grad[:, :, None, :], axis=2)
            _acc(x, g.reshape(s, 2 * q, f)[:, :p, :])
        x.tape.record(back)
    return out


def log_softmax_pick(logits, targets, allowed=None) -> Var:
    """Per-row ``log softmax(logits)[target]`` restricted to ``allowed`` entries.

    logits: (N, V); targets: (N,) ints; allowed: bool mask broadcastable to (N, V).
    """
    logits = const(logits)
    z = logits.value
    targets = np.asarray(targets, dtype=np.int64)
    if allowed is not None:
        allowed = np.broadcast_to(allowed, z.shape)
        z = np.where(allowed, z, -np.inf)
    m = z.max(axis=1, keepdims=True)
    e = np.exp(z - m)
    s = e.sum(axis=1, keepdims=True)
    rows = np.arange(z.shape[0])
    lp = z[rows, targets] - m[:, 0] - np.log(s[:, 0])
    out = _out(lp, logits.tape)
    if logits.tape is not None:
        def back():
            if out.grad is None:
                return
            g = -(e / s) * out.grad[:, None]
            g[rows, targets] += out.grad
            _acc(logits, g)
        logits.tape.record(back)
    return out
