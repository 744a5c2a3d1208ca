"""Run directories and the train / eval / report pipelines behind the CLI.

A run directory holds ``config.json``, ``vocab.txt``, ``policy.{manifest,bin}``,
``reward.{manifest,bin}`` (adversarial modes only) and ``train.log``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..data import N_SLOTS, Album, Vocab, flatten_words
from ..metrics import CorpusStats, MetricReport, evaluate
from ..numerics import load_params, save_params
from ..objectives import TrainConfig, TrainLog, arel_train, build_models, metric_rl_train, xe_ss_train
from ..policy import PolicyDims, PolicyModel
from ..reward import RewardDims, RewardModel

POLICY_DIM_KEYS = ("proj_dim", "enc_hidden", "dec_hidden", "word_dim", "max_sub_len")
REWARD_DIM_KEYS = ("reward_word_dim", "reward_filters", "reward_seq_len", "activation", "fusion")


@dataclass
class Run:
    config: TrainConfig
    vocab: Vocab
    feat_dim: int
    policy: PolicyModel
    reward: RewardModel | None


def save_run(directory: str | Path, run: Run) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = json.loads(run.config.to_json())
    meta["feat_dim"] = run.feat_dim
    meta["vocab_size"] = len(run.vocab)
    (d / "config.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    run.vocab.save(d / "vocab.txt")
    save_params(run.policy.params, d / "policy")
    if run.reward is not None:
        save_params(run.reward.params, d / "reward")


def load_run(directory: str | Path) -> Run:
    d = Path(directory)
    meta = json.loads((d / "config.json").read_text())
    cfg = TrainConfig.from_dict(meta)
    vocab = Vocab.load(d / "vocab.txt")
    feat_dim = int(meta["feat_dim"])
    if len(vocab) != meta["vocab_size"]:
        raise ValueError(f"{d}: vocab.txt does not match config.json")
    pd = PolicyDims(len(vocab), feat_dim, cfg.proj_dim, cfg.enc_hidden, cfg.dec_hidden,
                    cfg.word_dim, cfg.max_sub_len)
    policy = PolicyModel(pd, load_params(d / "policy"))
    reward = None
    if (d / "reward.manifest").exists():
        rd = RewardDims(len(vocab), feat_dim, cfg.reward_word_dim, cfg.reward_filters,
                        cfg.reward_seq_len, cfg.activation, cfg.fusion)
        reward = RewardModel(rd, load_params(d / "reward"))
    return Run(cfg, vocab, feat_dim, policy, reward)


def train_run(cfg: TrainConfig, albums: Sequence[Album], vocab: Vocab, out_dir: str | Path,
              init_from: str | Path | None = None) -> Run:
    """Train in ``cfg.mode`` and write the run directory (log written as it goes)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    feat_dim = albums[0].features.shape[1]
    reward = None
    if init_from is not None:
        init = load_run(init_from)
        if init.vocab != vocab:
            raise ValueError("--init-from checkpoint was trained with a different vocabulary")
        # model sizes follow the checkpoint
        cfg = cfg.with_(**{k: getattr(init.config, k) for k in POLICY_DIM_KEYS})
        policy = init.policy
        if init.reward is not None and all(getattr(init.config, k) == getattr(cfg, k) for k in REWARD_DIM_KEYS):
            reward = init.reward
        _, fresh_reward = build_models(cfg, len(vocab), feat_dim)
        reward = reward or fresh_reward
    else:
        policy, reward = build_models(cfg, len(vocab), feat_dim)
    log = TrainLog(out / "train.log")
    if cfg.mode == "xe-ss":
        xe_ss_train(policy, albums, vocab, cfg, log)
        reward = None
    elif cfg.mode == "metric-rl":
        metric_rl_train(policy, albums, vocab, cfg, log)
        reward = None
    else:
        arel_train(policy, reward, albums, vocab, cfg, log)
    run = Run(cfg, vocab, feat_dim, policy, reward)
    save_run(out, run)
    return run


def decode_split(policy: PolicyModel, albums: Sequence[Album], beam: int = 3, min_len: int = 5,
                 max_len: int = 110):
    """Beam-decode every album. ``max_len`` caps the whole story; each sub-story gets a fifth."""
    sub_max = min(policy.dims.max_sub_len, max_len // N_SLOTS)
    return [policy.beam_search(a, beam=beam, min_len=min_len, max_len=sub_max) for a in albums]


def evaluate_stories(stories, albums: Sequence[Album], vocab: Vocab) -> MetricReport:
    hyps = [flatten_words(vocab.decode_story(s)) for s in stories]
    refs = [[flatten_words(r) for r in a.references] for a in albums]
    return evaluate([a.album_id for a in albums], hyps, refs, CorpusStats(refs))


def write_stories(path: str | Path, albums: Sequence[Album], stories, vocab: Vocab) -> None:
    with open(path, "w") as fh:
        for a, s in zip(albums, stories):
            fh.write(a.album_id + "\t" + " | ".join(" ".join(x) for x in vocab.decode_story(s)) + "\n")


@dataclass
class RewardReport:
    album_ids: list[str]
    reference: np.ndarray
    generated: np.ndarray
    untrained: np.ndarray | None = None

    @property
    def summary(self) -> dict[str, float]:
        out = {"mean_reference": float(self.reference.mean()),
               "mean_generated": float(self.generated.mean())}
        out["reference_minus_generated"] = out["mean_reference"] - out["mean_generated"]
        if self.untrained is not None:
            out["mean_untrained_sample"] = float(self.untrained.mean())
            out["reference_minus_untrained"] = out["mean_reference"] - out["mean_untrained_sample"]
        return out

    def write_csv(self, path: str | Path) -> None:
        cols = ["album_id", "reference", "generated"] + (["untrained_sample"] if self.untrained is not None else [])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for n, aid in enumerate(self.album_ids):
                row = [aid, f"{self.reference[n]:.10f}", f"{self.generated[n]:.10f}"]
                if self.untrained is not None:
                    row.append(f"{self.untrained[n]:.10f}")
                w.writerow(row)
            for k, v in self.summary.items():
                w.writerow([k, f"{v:.10f}"])


def reward_report(policy: PolicyModel, reward: RewardModel, albums: Sequence[Album], vocab: Vocab,
                  untrained: PolicyModel | None = None, seed: int = 0, beam: int = 3) -> RewardReport:
    """Learned reward of reference 0 vs. the beam-search story for every album.

    With ``untrained`` given, also scores one sample per album from that policy.
    """
    feats = np.stack([a.features for a in albums])
    refs = [vocab.encode_story(a.references[0]) for a in albums]
    gen = decode_split(policy, albums, beam=beam)
    rep = RewardReport([a.album_id for a in albums],
                       reward.score(refs, feats).mean(axis=1),
                       reward.score(gen, feats).mean(axis=1))
    if untrained is not None:
        samples, _ = untrained.sample(feats, np.random.default_rng(seed))
        rep.untrained = reward.score(samples, feats).mean(axis=1)
    return rep
