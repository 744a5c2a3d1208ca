"""Exact computations over enumerable story spaces (test scale only)."""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from ..data import EOS, N_SLOTS, Album
from ..numerics import Tape
from ..numerics import autodiff as ad
from ..policy import PolicyModel
from ..reward import RewardModel

MAX_ENUM = 5_000_000


class EnumerationError(ValueError):
    pass


def log_partition(rewards: np.ndarray) -> float:
    r = np.asarray(rewards, dtype=np.float64).ravel()
    if r.size > MAX_ENUM:
        raise EnumerationError(f"space of {r.size} stories exceeds the cap of {MAX_ENUM}")
    m = r.max()
    return float(m + np.log(np.exp(r - m).sum()))


def boltzmann(rewards: np.ndarray) -> np.ndarray:
    """p(W) = exp(R(W)) / Z with Z summed over the whole given space."""
    r = np.asarray(rewards, dtype=np.float64)
    return np.exp(r - log_partition(r))


def boltzmann_over(reward_fn: Callable, stories: Sequence) -> np.ndarray:
    if len(stories) > MAX_ENUM:
        raise EnumerationError(f"space of {len(stories)} stories exceeds the cap of {MAX_ENUM}")
    return boltzmann(np.array([reward_fn(s) for s in stories]))


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return out


def policy_objective_exact(log_pi: np.ndarray, rewards: np.ndarray) -> tuple[float, float]:
    """(-KL(pi || p_theta) by direct summation, E_pi[R] - log Z + H(pi))."""
    log_pi = np.asarray(log_pi, dtype=np.float64).ravel()
    r = np.asarray(rewards, dtype=np.float64).ravel()
    if log_pi.shape != r.shape:
        raise EnumerationError("log_pi and rewards must cover the same space")
    log_z = log_partition(r)
    pi = np.exp(log_pi)
    nz = pi > 0
    neg_kl = float(np.sum(pi[nz] * ((r[nz] - log_z) - log_pi[nz])))
    entropy = float(-_xlogx(pi).sum())
    decomposition = float(np.sum(pi * r)) - log_z + entropy
    return neg_kl, decomposition


def enumerate_substories(word_ids: Sequence[int], max_len: int) -> list[tuple[int, ...]]:
    """Every sub-story of at most ``max_len`` tokens; EOS is forced at ``max_len``."""
    out = []
    for k in range(max_len):
        for words in itertools.product(word_ids, repeat=k):
            out.append(tuple(words) + (EOS,))
    return out


class EnumeratedSpace:
    """All stories of one album whose sub-stories come from ``candidates``.

    The policy factorizes over the five slots given the album and the story reward
    is the mean of per-slot partials, so per-slot tables broadcast to the full
    C**5 story space exactly.
    """

    def __init__(self, policy: PolicyModel, album: Album, candidates: Sequence[tuple[int, ...]],
                 reward: RewardModel | None = None):
        self.policy = policy
        self.album = album
        self.candidates = list(candidates)
        C = len(self.candidates)
        if C ** N_SLOTS > MAX_ENUM:
            raise EnumerationError(f"{C}**5 stories exceeds the cap of {MAX_ENUM}")
        self.slot_log_pi = self._slot_log_pi(None).value  # (5, C)
        self.slot_reward = None
        if reward is not None:
            stories = [tuple(c for _ in range(N_SLOTS)) for c in self.candidates]
            feats = np.broadcast_to(album.features, (C, N_SLOTS, album.features.shape[1]))
            self.slot_reward = reward.score(stories, feats).T  # (5, C)

    def _slot_log_pi(self, tape: Tape | None):
        P = self.policy.params.bind(tape)
        ctx = self.policy.encode_batch(self.album.features[None], P)[0]  # (5, 2H)
        C = len(self.candidates)
        rows = ad.reshape(ad.stack([ctx] * C, axis=1), (N_SLOTS * C, -1))
        seqs = [c for _ in range(N_SLOTS) for c in self.candidates]
        return ad.reshape(self.policy.sequence_log_probs(P, rows, seqs), (N_SLOTS, C))

    def _broadcast(self, table: np.ndarray, combine: str) -> np.ndarray:
        out = table[0]
        for i in range(1, N_SLOTS):
            out = out[..., None] + table[i].reshape((1,) * i + (-1,))
        return out / N_SLOTS if combine == "mean" else out

    def story_log_pi(self) -> np.ndarray:
        return self._broadcast(self.slot_log_pi, "sum")

    def story_reward(self) -> np.ndarray:
        if self.slot_reward is None:
            raise EnumerationError("no reward model attached")
        return self._broadcast(self.slot_reward, "mean")

    def story_index(self, story) -> tuple[int, ...]:
        return tuple(self.candidates.index(tuple(s)) for s in story)

    def objective(self, entropy_weight: float = 1.0, rewards: np.ndarray | None = None) -> float:
        """E_pi[R] + lambda * H(pi) over the whole space."""
        lp = self.story_log_pi()
        r = self.story_reward() if rewards is None else rewards
        pi = np.exp(lp)
        return float(np.sum(pi * (r - entropy_weight * lp)))

    def exact_gradient(self, entropy_weight: float = 1.0, rewards: np.ndarray | None = None) -> np.ndarray:
        """Flat gradient of E_pi[R] + lambda * H(pi) w.r.t. the policy parameters.

        Uses grad = sum_W pi(W) (R(W) - lambda log pi(W) - lambda) grad log pi(W) and
        the per-slot factorization of grad log pi(W).
        """
        lp = self.story_log_pi()
        r = self.story_reward() if rewards is None else rewards
        pi = np.exp(lp)
        w = pi * (r - entropy_weight * lp - entropy_weight)
        coef = np.stack([w.sum(axis=tuple(j for j in range(N_SLOTS) if j != i)) for i in range(N_SLOTS)])
        store = self.policy.params
        store.zero_grad()
        tape = Tape()
        out = ad.total(self._slot_log_pi(tape), coef)
        tape.backward(out)
        g = store.flat_grads().copy()
        store.zero_grad()
        return g
