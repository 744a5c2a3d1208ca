"""Training loops: XE with scheduled sampling, AREL alternation, GAN and metric-RL baselines."""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from ..data import Album, Vocab, flatten_words
from ..metrics import CorpusStats
from ..numerics import Adam
from ..policy import PolicyDims, PolicyModel
from ..reward import RewardDims, RewardModel
from .config import BaselineState, ConfigError, TrainConfig
from .steps import (gan_policy_step, gan_reward_step, metric_rl_step, policy_gradient_step,
                    reward_step, xe_step)

LOG_FIELDS = ("episode", "mode", "loss", "mean_reward_real", "mean_reward_fake", "baseline", "wall_ms")


class TrainLog:
    """Append-only episode records, one ``key=value`` line each."""

    def __init__(self, path: str | Path | None = None):
        self.records: list[dict] = []
        self.path = Path(path) if path is not None else None
        if self.path is not None:
            self.path.write_text("")

    def append(self, **rec) -> None:
        row = {k: rec.get(k, math.nan) for k in LOG_FIELDS}
        self.records.append(row)
        if self.path is not None:
            with open(self.path, "a") as fh:
                fh.write(format_record(row) + "\n")

    def __len__(self) -> int:
        return len(self.records)


def format_record(row: dict) -> str:
    parts = []
    for k in LOG_FIELDS:
        v = row[k]
        if isinstance(v, float):
            v = f"{v:.10g}"
        parts.append(f"{k}={v}")
    return " ".join(parts)


def parse_record(line: str) -> dict:
    out: dict = {}
    for kv in line.split():
        k, v = kv.split("=", 1)
        if k == "mode":
            out[k] = v
        elif k in ("episode", "wall_ms"):
            out[k] = int(v)
        else:
            out[k] = float(v)
    return out


def build_models(cfg: TrainConfig, vocab_size: int, feat_dim: int) -> tuple[PolicyModel, RewardModel]:
    pd = PolicyDims(vocab_size, feat_dim, cfg.proj_dim, cfg.enc_hidden, cfg.dec_hidden,
                    cfg.word_dim, cfg.max_sub_len)
    rd = RewardDims(vocab_size, feat_dim, cfg.reward_word_dim, cfg.reward_filters,
                    cfg.reward_seq_len, cfg.activation, cfg.fusion)
    return PolicyModel(pd, seed=cfg.seed), RewardModel(rd, seed=cfg.seed + 1)


class _Batches:
    def __init__(self, n: int, batch_size: int, rng: np.random.Generator):
        self.n, self.bs, self.rng = n, min(batch_size, n), rng

    def epoch(self) -> Iterator[np.ndarray]:
        order = self.rng.permutation(self.n)
        for s in range(0, self.n, self.bs):
            yield order[s:s + self.bs]

    def forever(self) -> Iterator[np.ndarray]:
        while True:
            yield from self.epoch()


class _Corpus:
    def __init__(self, albums: Sequence[Album], vocab: Vocab):
        if not albums:
            raise ConfigError("empty corpus")
        self.albums = list(albums)
        self.features = np.stack([a.features for a in self.albums])
        self.refs = [[vocab.encode_story(r) for r in a.references] for a in self.albums]

    def pick_refs(self, idx: np.ndarray, rng: np.random.Generator):
        return [self.refs[i][int(rng.integers(len(self.refs[i])))] for i in idx]


def _clock(cfg: TrainConfig) -> float:
    return time.perf_counter() if cfg.log_timing else 0.0


def _ms(cfg: TrainConfig, t0: float) -> int:
    return int(round(1000 * (time.perf_counter() - t0))) if cfg.log_timing else 0


def xe_ss_train(policy: PolicyModel, albums: Sequence[Album], vocab: Vocab, cfg: TrainConfig,
                log: TrainLog | None = None) -> PolicyModel:
    """Cross-entropy on references; scheduled-sampling rate ramps 0 -> ss_max over epochs."""
    log = log if log is not None else TrainLog()
    data = _Corpus(albums, vocab)
    rng = np.random.default_rng(cfg.seed)
    batches = _Batches(len(albums), cfg.batch_size, rng)
    adam = Adam(cfg.lr)
    episode = 0
    for epoch in range(cfg.epochs):
        ss = cfg.ss_max * epoch / max(1, cfg.epochs - 1)
        for idx in batches.epoch():
            t0 = _clock(cfg)
            st = xe_step(policy, data.features[idx], data.pick_refs(idx, rng), ss, rng)
            adam.step(policy.params)
            episode += 1
            log.append(episode=episode, mode="xe-ss", loss=st["loss"], wall_ms=_ms(cfg, t0))
    policy.params.check_finite()
    return policy


def arel_train(policy: PolicyModel, reward: RewardModel, albums: Sequence[Album], vocab: Vocab,
               cfg: TrainConfig, log: TrainLog | None = None) -> tuple[PolicyModel, RewardModel, TrainLog]:
    """Alternate ``alt_period`` policy episodes with ``alt_period`` reward episodes.

    Every episode first samples a story per album in the batch from the current
    policy. Also runs the gan1/gan2 baselines when ``cfg.mode`` says so.
    """
    if cfg.mode not in ("arel", "gan1", "gan2"):
        raise ConfigError(f"arel_train cannot run mode {cfg.mode!r}")
    log = log if log is not None else TrainLog()
    data = _Corpus(albums, vocab)
    rng = np.random.default_rng(cfg.seed)
    batches = _Batches(len(albums), cfg.batch_size, rng).forever()
    adam_p, adam_r = Adam(cfg.lr), Adam(cfg.reward_step_size)
    baseline = BaselineState(0.0, cfg.baseline_decay)
    gan = cfg.mode in ("gan1", "gan2")
    for episode in range(1, cfg.episodes + 1):
        t0 = _clock(cfg)
        idx = next(batches)
        feats = data.features[idx]
        real = data.pick_refs(idx, rng)
        if ((episode - 1) // cfg.alt_period) % 2 == 0:
            if gan:
                st = gan_policy_step(cfg.mode, policy, reward, feats, baseline, cfg, rng)
            else:
                st = policy_gradient_step(policy, reward, feats, baseline, cfg, rng)
            adam_p.step(policy.params)
            st["mean_reward_real"] = float(reward.score(real, feats).mean())
            phase = "policy"
        else:
            fake, _ = policy.sample(feats, rng, cfg.temperature)
            step = gan_reward_step if gan else reward_step
            st = step(reward, real, feats, fake, feats)
            adam_r.step(reward.params)
            st["baseline"] = baseline.b
            phase = "reward"
        log.append(episode=episode, mode=f"{cfg.mode}/{phase}", loss=st["loss"],
                   mean_reward_real=st["mean_reward_real"], mean_reward_fake=st["mean_reward_fake"],
                   baseline=st["baseline"], wall_ms=_ms(cfg, t0))
    policy.params.check_finite()
    reward.params.check_finite()
    return policy, reward, log


def metric_rl_train(policy: PolicyModel, albums: Sequence[Album], vocab: Vocab, cfg: TrainConfig,
                    log: TrainLog | None = None) -> PolicyModel:
    log = log if log is not None else TrainLog()
    data = _Corpus(albums, vocab)
    rng = np.random.default_rng(cfg.seed)
    batches = _Batches(len(albums), cfg.batch_size, rng).forever()
    adam = Adam(cfg.lr)
    baseline = BaselineState(0.0, cfg.baseline_decay)
    flat_refs = [[flatten_words(r) for r in a.references] for a in data.albums]
    stats = CorpusStats(flat_refs) if cfg.metric == "cider" else None

    def decode(story):
        return flatten_words(vocab.decode_story(story))

    for episode in range(1, cfg.episodes + 1):
        t0 = _clock(cfg)
        idx = next(batches)
        st = metric_rl_step(policy, data.features[idx], [flat_refs[i] for i in idx], decode,
                            cfg.metric, baseline, cfg, rng, stats)
        adam.step(policy.params)
        log.append(episode=episode, mode=f"metric-rl/{cfg.metric}", loss=st["loss"],
                   mean_reward_fake=st["mean_reward_fake"], baseline=st["baseline"],
                   wall_ms=_ms(cfg, t0))
    policy.params.check_finite()
    return policy
