"""Convolutional reward model scoring a (sub-story, image feature) pair.

R(W) = phi(W_r (f_conv(W) + W_i I) + b_r) with phi bounded (softsign or tanh).
``fusion="concat"`` feeds ``[f_conv(W); W_i I]`` to W_r instead of the sum.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .data import BOS, EOS, N_SLOTS, PAD, Album, DataError, Story
from .numerics import ParamStore, Var
from .numerics import autodiff as ad
from .numerics.kernels import activation, add_conv_bank, conv1d_bank, conv_bank_dim

KERNEL_SIZES = (2, 3, 4)


@dataclass(frozen=True)
class RewardDims:
    vocab_size: int
    feat_dim: int
    word_dim: int = 128
    n_filters: int = 128
    seq_len: int = 22
    activation: str = "softsign"
    fusion: str = "sum"

    def __post_init__(self):
        activation(self.activation)
        if self.fusion not in ("sum", "concat"):
            raise ValueError(f"fusion must be 'sum' or 'concat', got {self.fusion!r}")
        if self.seq_len < max(KERNEL_SIZES):
            raise ValueError(f"seq_len must be >= {max(KERNEL_SIZES)}")

    @property
    def rep_dim(self) -> int:
        return conv_bank_dim(self.seq_len, self.n_filters, KERNEL_SIZES)

    def to_dict(self) -> dict:
        return asdict(self)


class RewardModel:
    def __init__(self, dims: RewardDims, params: ParamStore | None = None, seed: int = 0):
        self.dims = dims
        self.phi = activation(dims.activation)
        if params is None:
            params = self._init_params(dims, seed)
        self.params = params

    @staticmethod
    def _init_params(d: RewardDims, seed: int) -> ParamStore:
        s = ParamStore(seed)
        s.glorot("emb", (d.vocab_size, d.word_dim))
        add_conv_bank(s, "conv", d.word_dim, d.n_filters, KERNEL_SIZES)
        s.glorot("img.W", (d.rep_dim, d.feat_dim))
        width = d.rep_dim * (2 if d.fusion == "concat" else 1)
        s.glorot("out.W", (1, width))
        s.zeros("out.b", (1,))
        return s

    def pack(self, subs: Sequence[Sequence[int]]) -> np.ndarray:
        """Strip BOS/EOS, cut to ``seq_len`` and right-pad with PAD: (S, seq_len) ids."""
        L = self.dims.seq_len
        out = np.full((len(subs), L), PAD, dtype=np.int64)
        for n, sub in enumerate(subs):
            words = []
            for t in sub:
                if t == EOS:
                    break
                if t != BOS and t != PAD:
                    words.append(int(t))
            words = words[:L]
            out[n, : len(words)] = words
        if out.size and out.max() >= self.dims.vocab_size:
            raise DataError("token id out of range")
        return out

    def forward(self, P: dict[str, Var], token_ids: np.ndarray, features) -> Var:
        """(S, seq_len) ids and (S, D) image features -> (S,) rewards in (-1, 1)."""
        features = ad.const(features)
        if features.shape[-1] != self.dims.feat_dim:
            raise DataError(f"image feature dim {features.shape[-1]} != {self.dims.feat_dim}")
        emb = ad.take_rows(P["emb"], token_ids)
        text = conv1d_bank(emb, P, "conv", KERNEL_SIZES)
        image = ad.linear(features, P["img.W"])
        joint = text + image if self.dims.fusion == "sum" else ad.concat([text, image], axis=1)
        pre = ad.linear(joint, P["out.W"], P["out.b"])
        return self.phi(ad.reshape(pre, (-1,)))

    def partials(self, P: dict[str, Var], stories: Sequence[Story], features: np.ndarray) -> Var:
        """(B, 5) partial rewards for B stories with (B, 5, D) features."""
        features = np.asarray(features, dtype=np.float64)
        B = len(stories)
        if features.shape[:2] != (B, N_SLOTS) or any(len(s) != N_SLOTS for s in stories):
            raise DataError("stories and albums must align as 5 sub-stories to 5 features")
        ids = self.pack([sub for story in stories for sub in story])
        r = self.forward(P, ids, features.reshape(B * N_SLOTS, -1))
        return ad.reshape(r, (B, N_SLOTS))

    def score(self, stories: Sequence[Story], features: np.ndarray) -> np.ndarray:
        return self.partials(self.params.bind(None), stories, features).value


def partial_reward(model: RewardModel, sub_story: Sequence[int], image_feature) -> float:
    image_feature = np.asarray(image_feature, dtype=np.float64)
    words = [t for t in sub_story if t not in (BOS, EOS, PAD)]
    if not words and image_feature.size == 0:
        raise DataError("empty sub-story with empty image feature")
    r = model.forward(model.params.bind(None), model.pack([sub_story]), image_feature[None])
    return float(r.value[0])


def story_reward(model: RewardModel, story: Story, album: Album) -> tuple[float, np.ndarray]:
    """Mean of the five partial rewards, and the partials themselves."""
    if len(story) != N_SLOTS or album.features.shape[0] != N_SLOTS:
        raise DataError("story and album must both have 5 parts")
    partials = model.score([story], album.features[None])[0]
    return float(partials.mean()), partials
