"""Synthetic photo-album corpus standing in for a real storytelling dataset.

Each album draws five topics. Image feature i is the topic's embedding plus
Gaussian noise. Each reference sentence fills one of a few shared templates with
topic-specific content words; synonym slots make the references of one album
differ while sharing content. Reference 0 of every album is canonical: the
topic's own template with the first synonym in every slot.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..data import N_SLOTS, Album, DataError

FUNCTION_WORDS = ("the", "a", "we", "was", "with", "near", "very", ".")
# no template puts three function tokens in a row, even across sentence breaks
TEMPLATES = (
    "the {adj} {noun} {verb} near the {place} .",
    "we {verb} a {noun} .",
    "{noun} was very {adj} .",
    "a {noun} {verb} with the {thing} .",
)
SLOT_SIZES = {"noun": 3, "thing": 2, "verb": 2, "adj": 2, "place": 1}

_ONSETS = ("b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "ch", "br", "tr")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ou")


@dataclass(frozen=True)
class CorpusSpec:
    n_albums: int = 2400
    n_topics: int = 16
    feat_dim: int = 64
    refs_per_album: int = 5
    noise_scale: float = 2.5
    seed: int = 0

    def __post_init__(self):
        if self.n_topics < 2:
            raise DataError("need at least 2 topics")
        if self.refs_per_album < 1:
            raise DataError("need at least 1 reference per album")
        if self.n_albums < 1 or self.feat_dim < 1:
            raise DataError("n_albums and feat_dim must be positive")


@dataclass
class Grammar:
    words: list[dict[str, list[str]]]  # per topic: slot -> synonyms

    def sentence(self, topic: int, rng: np.random.Generator | None) -> list[str]:
        slots = self.words[topic]
        if rng is None:
            template = TEMPLATES[topic % len(TEMPLATES)]
            fill = {k: v[0] for k, v in slots.items()}
        else:
            template = TEMPLATES[int(rng.integers(len(TEMPLATES)))]
            fill = {k: v[int(rng.integers(len(v)))] for k, v in slots.items()}
        return template.format(**fill).split()


def make_grammar(n_topics: int, rng: np.random.Generator) -> Grammar:
    need = n_topics * sum(SLOT_SIZES.values())
    pool: list[str] = []
    seen = set(FUNCTION_WORDS)
    while len(pool) < need:
        n_syll = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syll))
        if w not in seen:
            seen.add(w)
            pool.append(w)
    it = iter(pool)
    words = [{slot: [next(it) for _ in range(k)] for slot, k in SLOT_SIZES.items()}
             for _ in range(n_topics)]
    return Grammar(words)


def _round9(x: np.ndarray) -> np.ndarray:
    return np.array([float(f"{v:.8e}") for v in x.ravel()]).reshape(x.shape)


def generate_corpus(spec: CorpusSpec) -> list[Album]:
    rng = np.random.default_rng(spec.seed)
    grammar = make_grammar(spec.n_topics, rng)
    topic_emb = rng.normal(size=(spec.n_topics, spec.feat_dim))
    albums = []
    for a in range(spec.n_albums):
        topics = rng.integers(spec.n_topics, size=N_SLOTS)
        feats = topic_emb[topics] + spec.noise_scale * rng.normal(size=(N_SLOTS, spec.feat_dim))
        refs = [[grammar.sentence(int(t), None) for t in topics]]
        for _ in range(spec.refs_per_album - 1):
            refs.append([grammar.sentence(int(t), rng) for t in topics])
        albums.append(Album(f"album{a:05d}", _round9(feats), refs))
    return albums


def split_corpus(albums: Sequence[Album], n_train: int, n_val: int) -> tuple[list[Album], list[Album], list[Album]]:
    albums = list(albums)
    return albums[:n_train], albums[n_train:n_train + n_val], albums[n_train + n_val:]


# -- file format ---------------------------------------------------------------


def album_to_line(album: Album) -> str:
    rec = {
        "album_id": album.album_id,
        "features": [" ".join(f"{v:.8e}" for v in row) for row in album.features],
        "references": [[" ".join(sent) for sent in ref] for ref in album.references],
    }
    return json.dumps(rec, separators=(",", ":"))


def album_from_line(line: str) -> Album:
    rec = json.loads(line)
    feats = np.array([[float(v) for v in row.split()] for row in rec["features"]])
    refs = [[sent.split() for sent in ref] for ref in rec["references"]]
    return Album(rec["album_id"], feats, refs)


def write_corpus(path: str | Path, albums: Iterable[Album]) -> None:
    with open(path, "w") as fh:
        for album in albums:
            fh.write(album_to_line(album) + "\n")


def read_corpus(path: str | Path) -> list[Album]:
    with open(path) as fh:
        albums = [album_from_line(line) for line in fh if line.strip()]
    if albums:
        dims = {a.features.shape[1] for a in albums}
        if len(dims) != 1:
            raise DataError(f"{path}: inconsistent feature dimensions {sorted(dims)}")
    return albums


def spec_to_dict(spec: CorpusSpec) -> dict:
    return asdict(spec)
