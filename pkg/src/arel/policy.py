"""Story generator: bidirectional GRU over the five image features, one weight-tied
GRU decoder run once per image, and a softmax output layer.

The decoder input at every step is ``[embedding(previous token); context_i]`` and
its initial state is zero. PAD and BOS are never emitted; at the last allowed
position of a sub-story only EOS may be emitted, so every sub-story ends in EOS.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .data import BOS, EOS, N_SLOTS, PAD, Album, DataError, Story, trim_substory
from .numerics import ParamStore, Tape, Var
from .numerics import autodiff as ad
from .numerics.kernels import add_gru, gru_cell

NEG_INF = -np.inf


@dataclass(frozen=True)
class PolicyDims:
    vocab_size: int
    feat_dim: int
    proj_dim: int = 256
    enc_hidden: int = 256
    dec_hidden: int = 512
    word_dim: int = 256
    max_sub_len: int = 22

    def to_dict(self) -> dict:
        return asdict(self)


class PolicyModel:
    def __init__(self, dims: PolicyDims, params: ParamStore | None = None, seed: int = 0):
        self.dims = dims
        if params is None:
            params = self._init_params(dims, seed)
        self.params = params

    @staticmethod
    def _init_params(d: PolicyDims, seed: int) -> ParamStore:
        s = ParamStore(seed)
        s.glorot("proj.W", (d.proj_dim, d.feat_dim))
        s.zeros("proj.b", (d.proj_dim,))
        add_gru(s, "enc_f", d.proj_dim, d.enc_hidden)
        add_gru(s, "enc_b", d.proj_dim, d.enc_hidden)
        s.glorot("emb", (d.vocab_size, d.word_dim))
        add_gru(s, "dec", d.word_dim + 2 * d.enc_hidden, d.dec_hidden)
        s.glorot("out.W", (d.vocab_size, d.dec_hidden))
        s.zeros("out.b", (d.vocab_size,))
        return s

    @property
    def vocab_size(self) -> int:
        return self.dims.vocab_size

    # -- building blocks --------------------------------------------------

    def allowed(self, position: int, n_words: np.ndarray | None = None, min_len: int = 0,
                max_len: int | None = None) -> np.ndarray:
        """Emittable-token mask for the ``position``-th token (1-based) of a sub-story."""
        max_len = self.dims.max_sub_len if max_len is None else max_len
        V = self.vocab_size
        if position >= max_len:
            mask = np.zeros(V, dtype=bool)
            mask[EOS] = True
            return mask
        mask = np.ones(V, dtype=bool)
        mask[PAD] = mask[BOS] = False
        if n_words is not None and min_len > 0:
            mask = np.broadcast_to(mask, (len(n_words), V)).copy()
            mask[np.asarray(n_words) < min_len, EOS] = False
        return mask

    def encode_batch(self, features: np.ndarray, P: dict[str, Var]) -> Var:
        """(B, 5, D) features -> (B, 5, 2*H_enc) contexts."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 3 or features.shape[1] != N_SLOTS or features.shape[2] != self.dims.feat_dim:
            raise DataError(f"features must be (B, {N_SLOTS}, {self.dims.feat_dim}), got {features.shape}")
        B = features.shape[0]
        H = self.dims.enc_hidden
        x = ad.linear(features, P["proj.W"], P["proj.b"])
        xs = [x[:, i, :] for i in range(N_SLOTS)]
        h = ad.const(np.zeros((B, H)))
        fwd = []
        for i in range(N_SLOTS):
            h = gru_cell(h, xs[i], P, "enc_f")
            fwd.append(h)
        h = ad.const(np.zeros((B, H)))
        bwd: list[Var] = [None] * N_SLOTS  # type: ignore[list-item]
        for i in reversed(range(N_SLOTS)):
            h = gru_cell(h, xs[i], P, "enc_b")
            bwd[i] = h
        return ad.stack([ad.concat([fwd[i], bwd[i]], axis=-1) for i in range(N_SLOTS)], axis=1)

    def step(self, P: dict[str, Var], state, prev_tokens, context) -> tuple[Var, Var]:
        prev_tokens = np.asarray(prev_tokens, dtype=np.int64)
        if prev_tokens.size and (prev_tokens.min() < 0 or prev_tokens.max() >= self.vocab_size):
            raise DataError("token id out of range")
        x = ad.concat([ad.take_rows(P["emb"], prev_tokens), context], axis=-1)
        state = gru_cell(state, x, P, "dec")
        return state, ad.linear(state, P["out.W"], P["out.b"])

    def init_state(self, n: int) -> Var:
        return ad.const(np.zeros((n, self.dims.dec_hidden)))

    # -- scoring ----------------------------------------------------------

    def sequence_log_probs(self, P: dict[str, Var], contexts: Var, seqs: Sequence[Sequence[int]],
                           ss_prob: float = 0.0, rng: np.random.Generator | None = None) -> Var:
        """Teacher-forced log-probability of each sequence; (N,) Var.

        ``contexts`` is (N, 2*H_enc). Sequences longer than ``max_sub_len`` are cut
        and closed with EOS. With ``ss_prob > 0`` each decoder input after BOS is,
        with that probability, replaced by a token sampled from the model's own
        previous-step distribution (scheduled sampling).
        """
        L = self.dims.max_sub_len
        seqs = [_close(trim_substory(s), L) for s in seqs]
        N = len(seqs)
        T = max(len(s) for s in seqs)
        targets = np.full((N, T), EOS, dtype=np.int64)
        mask = np.zeros((N, T))
        for n, s in enumerate(seqs):
            targets[n, : len(s)] = s
            mask[n, : len(s)] = 1.0
        if np.any(targets >= self.vocab_size) or np.any(targets < 0):
            raise DataError("token id out of range")
        state = self.init_state(N)
        prev = np.full(N, BOS, dtype=np.int64)
        total = None
        for t in range(T):
            state, logits = self.step(P, state, prev, contexts)
            allowed = self.allowed(t + 1)
            if not np.all(allowed[targets[:, t]] | (mask[:, t] == 0)):
                raise DataError("reference contains a token the policy cannot emit")
            lp = ad.log_softmax_pick(logits, targets[:, t], allowed) * mask[:, t]
            total = lp if total is None else total + lp
            prev = targets[:, t].copy()
            if ss_prob > 0.0 and t + 1 < T:
                swap = rng.random(N) < ss_prob
                if swap.any():
                    drawn = _draw(_masked_probs(logits.value, allowed, 1.0), rng)
                    prev[swap] = drawn[swap]
        return total

    def story_log_probs(self, P: dict[str, Var], features: np.ndarray, stories: Sequence[Story],
                        ss_prob: float = 0.0, rng: np.random.Generator | None = None) -> Var:
        """Per-sub-story log-probs of B stories given (B, 5, D) features; (B, 5) Var."""
        ctx = self.encode_batch(features, P)
        B = len(stories)
        flat_ctx = ad.reshape(ctx, (B * N_SLOTS, -1))
        seqs = [sub for story in stories for sub in story]
        if len(seqs) != B * N_SLOTS:
            raise DataError("each story needs exactly 5 sub-stories")
        lp = self.sequence_log_probs(P, flat_ctx, seqs, ss_prob, rng)
        return ad.reshape(lp, (B, N_SLOTS))

    # -- decoding ---------------------------------------------------------

    def sample(self, features: np.ndarray, rng: np.random.Generator,
               temperature: float = 1.0) -> tuple[list[Story], np.ndarray]:
        """Sample one story per album. Returns stories and (B, 5) sub-story log-probs.

        Tokens are drawn from softmax(logits / temperature); the returned log-probs
        are under the untempered policy.
        """
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        P = self.params.bind(None)
        features = np.asarray(features, dtype=np.float64)
        B = features.shape[0]
        N = B * N_SLOTS
        ctx = ad.reshape(self.encode_batch(features, P), (N, -1))
        state = self.init_state(N)
        prev = np.full(N, BOS, dtype=np.int64)
        done = np.zeros(N, dtype=bool)
        logp = np.zeros(N)
        tokens: list[list[int]] = [[] for _ in range(N)]
        for t in range(1, self.dims.max_sub_len + 1):
            state, logits = self.step(P, state, prev, ctx)
            allowed = self.allowed(t)
            z = np.where(allowed, logits.value, NEG_INF)
            lsm = z - _logsumexp(z)
            probs = _masked_probs(logits.value, allowed, temperature)
            drawn = _draw(probs, rng)
            live = ~done
            logp[live] += lsm[live, drawn[live]]
            for n in np.flatnonzero(live):
                tokens[n].append(int(drawn[n]))
            done |= drawn == EOS
            prev = drawn
            if done.all():
                break
        stories = [tuple(tuple(tokens[b * N_SLOTS + i]) for i in range(N_SLOTS)) for b in range(B)]
        return stories, logp.reshape(B, N_SLOTS)

    def contexts(self, album: Album) -> np.ndarray:
        return self.encode_batch(album.features[None], self.params.bind(None)).value[0]

    def greedy(self, album: Album, min_len: int = 0, max_len: int | None = None) -> Story:
        max_len = self.dims.max_sub_len if max_len is None else max_len
        P = self.params.bind(None)
        ctx = self.contexts(album)
        state = self.init_state(N_SLOTS)
        prev = np.full(N_SLOTS, BOS, dtype=np.int64)
        done = np.zeros(N_SLOTS, dtype=bool)
        out: list[list[int]] = [[] for _ in range(N_SLOTS)]
        for t in range(1, max_len + 1):
            state, logits = self.step(P, state, prev, ctx)
            n_words = np.array([len(o) for o in out])
            allowed = self.allowed(t, n_words, min_len, max_len)
            prev = np.argmax(np.where(allowed, logits.value, NEG_INF), axis=1)
            for i in np.flatnonzero(~done):
                out[i].append(int(prev[i]))
            done |= prev == EOS
            if done.all():
                break
        return tuple(tuple(o) for o in out)

    def beam_search(self, album: Album, beam: int = 3, min_len: int = 5,
                    max_len: int | None = None) -> Story:
        """Length-normalized beam search, run for the five sub-stories in one batch.

        Each step keeps the ``beam`` best extensions (summed log-prob) of a slot;
        those ending in EOS move to the finished pool, so the live beam shrinks.
        Ties go to the smaller token id, then the earlier hypothesis. The
        finished hypothesis with the best log-prob per token wins.
        """
        max_len = self.dims.max_sub_len if max_len is None else max_len
        if beam < 1 or not 0 <= min_len < max_len:
            raise ValueError("need beam >= 1 and 0 <= min_len < max_len")
        ctx = self.contexts(album)
        P = self.params.bind(None)
        # live hypotheses per slot: (tokens, summed log-prob)
        alive: list[list[tuple[tuple[int, ...], float]]] = [[((), 0.0)] for _ in range(N_SLOTS)]
        finished: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in range(N_SLOTS)]
        states = np.zeros((N_SLOTS, self.dims.dec_hidden))
        for t in range(1, max_len + 1):
            slot_of = np.array([i for i in range(N_SLOTS) for _ in alive[i]], dtype=np.int64)
            if slot_of.size == 0:
                break
            hyps = [h for i in range(N_SLOTS) for h in alive[i]]
            prev = np.array([h[0][-1] if h[0] else BOS for h in hyps], dtype=np.int64)
            new_state, logits = self.step(P, ad.const(states), prev, ctx[slot_of])
            n_words = np.array([len(h[0]) for h in hyps])
            allowed = np.broadcast_to(self.allowed(t, n_words, min_len, max_len), logits.shape)
            z = np.where(allowed, logits.value, NEG_INF)
            scores = np.array([h[1] for h in hyps])[:, None] + (z - _logsumexp(z))
            rows = []
            for i in range(N_SLOTS):
                mine = np.flatnonzero(slot_of == i)
                if mine.size == 0:
                    continue
                parent, tok = np.nonzero(allowed[mine])
                cand = scores[mine[parent], tok]
                order = np.lexsort((parent, tok, -cand))[:beam]
                nxt = []
                for j in order:
                    p, v = int(mine[parent[j]]), int(tok[j])
                    hyp = (hyps[p][0] + (v,), float(cand[j]))
                    if v == EOS:
                        finished[i].append(hyp)
                    else:
                        nxt.append(hyp)
                        rows.append(p)
                alive[i] = nxt
            states = new_state.value[rows]
        out = []
        for pool in finished:
            best = max(range(len(pool)), key=lambda k: (pool[k][1] / len(pool[k][0]), -k))
            out.append(pool[best][0])
        return tuple(out)


def story_log_prob(model: PolicyModel, album: Album, story: Story, tape: Tape | None = None) -> Var:
    """Teacher-forced log pi(story | album); differentiable when a tape is given."""
    P = model.params.bind(tape)
    lp = model.story_log_probs(P, album.features[None], [story])
    return ad.total(lp)


def sample_story(model: PolicyModel, album: Album, rng: np.random.Generator,
                 temperature: float = 1.0) -> tuple[Story, float]:
    stories, lp = model.sample(album.features[None], rng, temperature)
    return stories[0], float(lp.sum())


def _close(sub: tuple[int, ...], max_len: int) -> tuple[int, ...]:
    if not sub:
        return (EOS,)
    if sub[-1] != EOS:
        sub = sub + (EOS,)
    if len(sub) > max_len:
        sub = sub[: max_len - 1] + (EOS,)
    return sub


def _logsumexp(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=-1, keepdims=True)
    return m + np.log(np.exp(z - m).sum(axis=-1, keepdims=True))


def _masked_probs(logits: np.ndarray, allowed: np.ndarray, temperature: float) -> np.ndarray:
    z = np.where(allowed, logits / temperature, NEG_INF)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _draw(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0]) * cdf[:, -1]
    idx = (cdf <= u[:, None]).sum(axis=1)
    # never land on a zero-probability slot through round-off
    idx = np.minimum(idx, probs.shape[1] - 1)
    bad = probs[np.arange(len(idx)), idx] == 0
    if bad.any():
        idx[bad] = np.argmax(probs[bad], axis=1)
    return idx
