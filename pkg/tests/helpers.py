"""Small model and corpus builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from arel.data import Album
from arel.policy import PolicyDims, PolicyModel
from arel.reward import RewardDims, RewardModel


def random_album(rng, feat_dim, album_id="a0"):
    return Album(album_id, rng.normal(size=(5, feat_dim)), [[["x"]] * 5])


def tiny_policy(vocab_size=6, feat_dim=3, max_sub_len=3, seed=0, scale=1.0, hidden=3):
    dims = PolicyDims(vocab_size, feat_dim, proj_dim=3, enc_hidden=hidden, dec_hidden=4, word_dim=2,
                      max_sub_len=max_sub_len)
    model = PolicyModel(dims, seed=seed)
    rng = np.random.default_rng(seed + 1000)
    for n in model.params:
        model.params.set(n, scale * rng.normal(size=model.params.value(n).shape))
    return model


def tiny_reward(vocab_size=6, feat_dim=3, seed=0, scale=1.0, activation="softsign", fusion="sum",
                n_filters=1, seq_len=4, word_dim=2):
    dims = RewardDims(vocab_size, feat_dim, word_dim=word_dim, n_filters=n_filters, seq_len=seq_len,
                      activation=activation, fusion=fusion)
    model = RewardModel(dims, seed=seed)
    rng = np.random.default_rng(seed + 2000)
    for n in model.params:
        model.params.set(n, scale * rng.normal(size=model.params.value(n).shape))
    return model


def zero_params(model):
    for n in model.params:
        model.params.set(n, np.zeros_like(model.params.value(n)))
    return model
