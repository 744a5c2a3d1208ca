"""Vocabulary, albums and stories."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<pad>", "<bos>", "<eos>", "<unk>")
N_SLOTS = 5

# A story is five sub-stories; each sub-story is a tuple of token ids ending in EOS.
Story = tuple[tuple[int, ...], ...]
# Raw references keep the text form: five whitespace-split sentences.
TextStory = list[list[str]]


class DataError(ValueError):
    pass


@dataclass
class Album:
    album_id: str
    features: np.ndarray  # (5, D_img)
    references: list[TextStory] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] != N_SLOTS:
            raise DataError(f"album {self.album_id}: need {N_SLOTS} feature vectors, got {self.features.shape}")
        if not self.references:
            raise DataError(f"album {self.album_id}: no references")
        for ref in self.references:
            if len(ref) != N_SLOTS:
                raise DataError(f"album {self.album_id}: reference with {len(ref)} sub-stories")

    def __eq__(self, other):
        if not isinstance(other, Album):
            return NotImplemented
        return (self.album_id == other.album_id
                and np.array_equal(self.features, other.features)
                and self.references == other.references)


class Vocab:
    """Dense token <-> id map; ids 0..3 are PAD, BOS, EOS, UNK."""

    def __init__(self, tokens: Sequence[str], min_count: int = 0):
        tokens = list(tokens)
        if tuple(tokens[:4]) != RESERVED:
            tokens = list(RESERVED) + [t for t in tokens if t not in RESERVED]
        if len(set(tokens)) != len(tokens):
            raise DataError("duplicate tokens in vocabulary")
        self.tokens = tokens
        self.min_count = min_count
        self._ids = {t: i for i, t in enumerate(tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.tokens == other.tokens

    def id(self, token: str) -> int:
        return self._ids.get(token, UNK)

    def encode_sentence(self, words: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.id(w) for w in words) + (EOS,)

    def encode_story(self, story: TextStory) -> Story:
        return tuple(self.encode_sentence(s) for s in story)

    def decode_sentence(self, ids: Iterable[int]) -> list[str]:
        out = []
        for i in ids:
            if i == EOS:
                break
            if i not in (PAD, BOS):
                out.append(self.tokens[i])
        return out

    def decode_story(self, story: Story) -> TextStory:
        return [self.decode_sentence(s) for s in story]

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        return cls(Path(path).read_text().splitlines())


def build_vocab(albums: Iterable[Album], min_count: int = 3) -> Vocab:
    """Keep tokens seen more than ``min_count`` times; order by count desc, then text."""
    counts: Counter[str] = Counter()
    for album in albums:
        for ref in album.references:
            for sent in ref:
                counts.update(sent)
    if not counts:
        raise DataError("empty corpus")
    kept = sorted((t for t, c in counts.items() if c > min_count and t not in RESERVED),
                  key=lambda t: (-counts[t], t))
    return Vocab(list(RESERVED) + kept, min_count=min_count)


def validate_story(story: Story, vocab_size: int) -> None:
    if len(story) != N_SLOTS:
        raise DataError(f"story has {len(story)} sub-stories, expected {N_SLOTS}")
    for sub in story:
        if not sub or sub[-1] != EOS:
            raise DataError("sub-story must end in EOS")
        if any(t == PAD for t in sub):
            raise DataError("PAD inside sub-story")
        if any(t < 0 or t >= vocab_size for t in sub):
            raise DataError("token id out of range")


def trim_substory(sub: Sequence[int]) -> tuple[int, ...]:
    """Cut a sub-story at its first EOS (dropping trailing padding)."""
    sub = tuple(int(t) for t in sub)
    if EOS in sub:
        return sub[: sub.index(EOS) + 1]
    return sub


def flatten_words(story: TextStory) -> list[str]:
    return [w for sent in story for w in sent]
