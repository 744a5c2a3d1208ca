"""Composite differentiable kernels built from the autodiff primitives."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import NumericsError, Var
from .params import ParamStore


def softmax(logits) -> np.ndarray:
    """Max-shifted softmax over the last axis (plain arrays, no tape)."""
    z = np.asarray(logits, dtype=np.float64)
    ad.check_finite(z, "logits")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def activation(name: str):
    if name == "softsign":
        return ad.softsign
    if name == "tanh":
        return ad.tanh
    raise NumericsError(f"unknown activation {name!r}; expected 'softsign' or 'tanh'")


def add_gru(store: ParamStore, prefix: str, n_in: int, hidden: int) -> None:
    store.glorot(f"{prefix}.W", (3 * hidden, n_in))
    store.glorot(f"{prefix}.U_zr", (2 * hidden, hidden))
    store.glorot(f"{prefix}.U_h", (hidden, hidden))
    store.zeros(f"{prefix}.b", (3 * hidden,))


def gru_cell(h_prev: Var, x: Var, P: dict[str, Var], prefix: str) -> Var:
    """One GRU step on batched rows.

    z = sigmoid(W_z x + U_z h + b_z), r = sigmoid(W_r x + U_r h + b_r),
    h~ = tanh(W_h x + U_h (r * h) + b_h), h' = (1 - z) * h + z * h~.
    """
    h_prev, x = ad.const(h_prev), ad.const(x)
    W, U_zr, U_h = P[f"{prefix}.W"], P[f"{prefix}.U_zr"], P[f"{prefix}.U_h"]
    H = U_h.shape[0]
    if h_prev.shape[-1] != H or x.shape[-1] != W.shape[1]:
        raise NumericsError(
            f"gru_cell {prefix}: got h {h_prev.shape}, x {x.shape}; expected H={H}, X={W.shape[1]}")
    ad.check_finite(h_prev.value, "GRU state")
    ad.check_finite(x.value, "GRU input")
    gx = ad.linear(x, W, P[f"{prefix}.b"])
    gh = ad.linear(h_prev, U_zr)
    zr = ad.sigmoid(gx[..., : 2 * H] + gh)
    z = zr[..., :H]
    r = zr[..., H:]
    h_tilde = ad.tanh(gx[..., 2 * H:] + ad.linear(r * h_prev, U_h))
    return h_prev + z * (h_tilde - h_prev)


def add_conv_bank(store: ParamStore, prefix: str, emb_dim: int, n_filters: int,
                  kernel_sizes=(2, 3, 4)) -> None:
    for k in kernel_sizes:
        store.glorot(f"{prefix}.K{k}", (n_filters, k * emb_dim))
        store.zeros(f"{prefix}.c{k}", (n_filters,))


def conv_bank_dim(length: int, n_filters: int, kernel_sizes=(2, 3, 4)) -> int:
    return n_filters * sum((length - k + 2) // 2 for k in kernel_sizes)


def conv1d_bank(emb: Var, P: dict[str, Var], prefix: str, kernel_sizes=(2, 3, 4)) -> Var:
    """(S, T, E) embeddings -> (S, F_total) n-gram features.

    Per kernel size k: valid stride-1 convolution, max-pool (window 2, stride 2,
    odd tail passed through), flatten; results concatenated over k.
    """
    emb = ad.const(emb)
    if emb.value.ndim != 3 or emb.shape[1] == 0:
        raise NumericsError("conv1d_bank: need non-empty (S, T, E) input")
    feats = []
    s = emb.shape[0]
    for k in kernel_sizes:
        windows = ad.unfold(emb, k)
        conv = ad.linear(windows, P[f"{prefix}.K{k}"], P[f"{prefix}.c{k}"])
        pooled = ad.maxpool_pairs(conv)
        feats.append(ad.reshape(pooled, (s, -1)))
    return ad.concat(feats, axis=1)
