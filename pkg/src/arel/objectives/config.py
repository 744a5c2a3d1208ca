from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

MODES = ("xe-ss", "arel", "gan1", "gan2", "metric-rl")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    """All training hyperparameters. Defaults are the full-size model; see ``preset("desk")`` for CPU-scale sizes."""

    mode: str = "arel"
    metric: str = "rouge-l"
    alt_period: int = 50
    activation: str = "softsign"
    fusion: str = "sum"
    lr: float = 2e-4
    reward_lr: float | None = None  # reward-model step size; None means lr
    batch_size: int = 64
    baseline_decay: float = 0.95
    entropy_weight: float = 1.0
    entropy_mode: str = "story"  # "story": -log pi(W); "token_mean": per-token mean
    reward_credit: str = "partial"  # "partial": sub-story i gets partial_i; "story": mean
    temperature: float = 1.0
    ss_max: float = 0.25
    epochs: int = 10
    episodes: int = 1000
    seed: int = 0
    # policy
    proj_dim: int = 256
    enc_hidden: int = 256
    dec_hidden: int = 512
    word_dim: int = 256
    max_sub_len: int = 22
    # reward
    reward_word_dim: int = 128
    reward_filters: int = 128
    reward_seq_len: int = 22
    log_timing: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.alt_period < 1:
            raise ConfigError("alt_period must be >= 1")
        if self.lr < 0 or (self.reward_lr is not None and self.reward_lr < 0):
            raise ConfigError("learning rates must be >= 0")
        if not 0.0 <= self.baseline_decay < 1.0:
            raise ConfigError("baseline_decay must be in [0, 1)")
        if self.activation not in ("softsign", "tanh"):
            raise ConfigError("activation must be softsign or tanh")
        if self.entropy_mode not in ("story", "token_mean"):
            raise ConfigError("entropy_mode must be story or token_mean")
        if self.reward_credit not in ("partial", "story"):
            raise ConfigError("reward_credit must be partial or story")
        if self.batch_size < 1 or self.temperature <= 0:
            raise ConfigError("batch_size and temperature must be positive")
        if not 0.0 <= self.ss_max <= 1.0:
            raise ConfigError("ss_max must be a probability")

    @property
    def reward_step_size(self) -> float:
        return self.lr if self.reward_lr is None else self.reward_lr

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def load(cls, path: str | Path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


# Small model sizes that train on one CPU core in minutes.
DESK = dict(
    proj_dim=32, enc_hidden=32, dec_hidden=64, word_dim=32,
    reward_word_dim=32, reward_filters=16, lr=2e-4,
)


def preset(name: str, **overrides) -> TrainConfig:
    if name == "full":
        return TrainConfig(**overrides)
    if name == "desk":
        return TrainConfig(**{**DESK, **overrides})
    raise ConfigError(f"unknown preset {name!r}")


@dataclass
class BaselineState:
    """Exponential moving average of observed returns."""

    b: float = 0.0
    decay: float = 0.95

    def update(self, value: float) -> None:
        self.b = self.decay * self.b + (1.0 - self.decay) * float(value)
