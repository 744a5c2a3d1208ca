"""Single-batch gradient computations. Every function leaves a descent-direction
gradient (d loss / d params) in the target ParamStore's grad buffers."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..data import N_SLOTS, Story
from ..metrics import METRICS
from ..numerics import NumericsError, Tape
from ..numerics import autodiff as ad
from ..policy import PolicyModel
from ..reward import RewardModel
from .config import BaselineState, TrainConfig


def _reinforce(policy: PolicyModel, features: np.ndarray, stories: Sequence[Story],
               weights: np.ndarray) -> None:
    """Accumulate -mean_b sum_i weights[b, i] * grad log pi(W_b,i)."""
    store = policy.params
    store.zero_grad()
    tape = Tape()
    lp = policy.story_log_probs(store.bind(tape), features, stories)
    tape.backward(ad.total(lp, -weights / len(stories)))


def entropy_estimate(sub_log_probs: np.ndarray, stories: Sequence[Story], mode: str) -> np.ndarray:
    """Per-story single-sample estimate of H(pi): -log pi(W) or its per-token mean."""
    neg = -sub_log_probs.sum(axis=1)
    if mode == "token_mean":
        lengths = np.array([sum(len(s) for s in story) for story in stories], dtype=np.float64)
        return neg / lengths
    return neg


def policy_gradient_step(policy: PolicyModel, reward: RewardModel, features: np.ndarray,
                         baseline: BaselineState, cfg: TrainConfig,
                         rng: np.random.Generator) -> dict:
    """REINFORCE on the learned reward plus an entropy bonus.

    Story credit: weight (R(W) + lambda * H_hat - b) on every token.
    Partial credit: sub-story i gets (partial_i + lambda * H_hat_i - b), where
    H_hat_i is the sub-story's own -log pi. The baseline is updated afterwards
    with the batch-mean story reward.
    """
    stories, sub_lp = policy.sample(features, rng, cfg.temperature)
    if not np.all(np.isfinite(sub_lp)):
        raise NumericsError("non-finite sampled log-probability")
    partials = reward.score(stories, features)
    story_r = partials.mean(axis=1)
    lam = cfg.entropy_weight
    b = baseline.b
    if cfg.reward_credit == "story":
        ent = entropy_estimate(sub_lp, stories, cfg.entropy_mode)
        w = np.repeat((story_r + lam * ent - b)[:, None], N_SLOTS, axis=1)
    else:
        ent = -sub_lp
        if cfg.entropy_mode == "token_mean":
            ent = ent / np.array([[len(s) for s in story] for story in stories], dtype=np.float64)
        w = partials + lam * ent - b
    _reinforce(policy, features, stories, w)
    baseline.update(story_r.mean())
    return {"loss": float(-(w * sub_lp).sum(axis=1).mean()), "mean_reward_fake": float(story_r.mean()),
            "baseline": baseline.b, "stories": stories}


def reward_step(reward: RewardModel, real: Sequence[Story], real_features: np.ndarray,
                fake: Sequence[Story], fake_features: np.ndarray) -> dict:
    """Gradient of mean R(fake) - mean R(real), i.e. descent raises R on real data.

    The two expectations are differentiated in separate passes so that identical
    batches cancel exactly.
    """
    if not real or not fake:
        raise ValueError("both batches must be non-empty")
    store = reward.params

    def grad_of(stories, feats):
        store.zero_grad()
        tape = Tape()
        r = reward.partials(store.bind(tape), stories, feats)
        tape.backward(ad.total(r, 1.0 / (len(stories) * N_SLOTS)))
        return {n: store.grad(n).copy() for n in store}, float(r.value.mean())

    g_real, r_real = grad_of(real, real_features)
    g_fake, r_fake = grad_of(fake, fake_features)
    for n in store:
        store.grad(n)[...] = g_fake[n] - g_real[n]
    return {"loss": r_fake - r_real, "mean_reward_real": r_real, "mean_reward_fake": r_fake}


# -- GAN baselines -----------------------------------------------------------


def discriminator_prob(story_reward: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * np.asarray(story_reward)) + 1.0)


def gan_weight(mode: str, d: np.ndarray) -> np.ndarray:
    """Per-story generator loss: -log D (gan1) or log(1 - D) (gan2)."""
    d = np.asarray(d, dtype=np.float64)
    if np.any((d <= 0) | (d >= 1)):
        raise ValueError("D must lie strictly inside (0, 1)")
    if mode == "gan1":
        return -np.log(d)
    if mode == "gan2":
        return np.log1p(-d)
    raise ValueError(f"unknown GAN mode {mode!r}")


def gan_policy_step(mode: str, policy: PolicyModel, reward: RewardModel, features: np.ndarray,
                    baseline: BaselineState, cfg: TrainConfig, rng: np.random.Generator) -> dict:
    stories, sub_lp = policy.sample(features, rng, cfg.temperature)
    story_r = reward.score(stories, features).mean(axis=1)
    loss_w = gan_weight(mode, discriminator_prob(story_r))
    b = baseline.b
    # minimizing E[loss_w]: REINFORCE return is -(loss_w - b)
    w = np.repeat((-(loss_w - b))[:, None], N_SLOTS, axis=1)
    _reinforce(policy, features, stories, w)
    baseline.update(loss_w.mean())
    return {"loss": float(loss_w.mean()), "mean_reward_fake": float(story_r.mean()),
            "baseline": baseline.b, "stories": stories}


def gan_reward_step(reward: RewardModel, real: Sequence[Story], real_features: np.ndarray,
                    fake: Sequence[Story], fake_features: np.ndarray) -> dict:
    """Binary cross-entropy discriminator update with D = sigmoid(story reward)."""
    store = reward.params
    store.zero_grad()
    tape = Tape()
    P = store.bind(tape)
    sr = reward.partials(P, real, real_features)
    sf = reward.partials(P, fake, fake_features)
    mean_r = ad.linear(sr, np.full((1, N_SLOTS), 1.0 / N_SLOTS))
    mean_f = ad.linear(sf, np.full((1, N_SLOTS), 1.0 / N_SLOTS))
    loss = (ad.total(ad.log_sigmoid(mean_r), -1.0 / len(real))
            + ad.total(ad.log_sigmoid(-mean_f), -1.0 / len(fake)))
    tape.backward(loss)
    return {"loss": float(loss.value), "mean_reward_real": float(sr.value.mean()),
            "mean_reward_fake": float(sf.value.mean())}


# -- metric RL baseline ----------------------------------------------------------


def metric_returns(metric: str, hyps: Sequence[list], refs: Sequence[Sequence[list]], stats=None) -> np.ndarray:
    m = METRICS[metric]
    f = m.bind(stats)
    return np.array([f(h, r) if h else 0.0 for h, r in zip(hyps, refs)])


def metric_rl_step(policy: PolicyModel, features: np.ndarray, refs: Sequence[Sequence[list]],
                   decode, metric: str, baseline: BaselineState, cfg: TrainConfig,
                   rng: np.random.Generator, stats=None) -> dict:
    """REINFORCE with the story-level metric score (vs. all references) as return.

    ``decode`` maps a Story to its flat word list; ``refs`` are flat word lists.
    """
    stories, _ = policy.sample(features, rng, cfg.temperature)
    scores = metric_returns(metric, [decode(s) for s in stories], refs, stats)
    w = np.repeat((scores - baseline.b)[:, None], N_SLOTS, axis=1)
    _reinforce(policy, features, stories, w)
    baseline.update(scores.mean())
    return {"loss": float(-scores.mean()), "mean_reward_fake": float(scores.mean()),
            "baseline": baseline.b, "stories": stories}


# -- cross-entropy with scheduled sampling ------------------------------------------


def xe_step(policy: PolicyModel, features: np.ndarray, refs: Sequence[Story], ss_prob: float,
            rng: np.random.Generator) -> dict:
    """Gradient of the mean negative log-likelihood of reference stories."""
    store = policy.params
    store.zero_grad()
    tape = Tape()
    lp = policy.story_log_probs(store.bind(tape), features, refs, ss_prob, rng)
    loss = ad.total(lp, -1.0 / len(refs))
    tape.backward(loss)
    return {"loss": float(loss.value)}
