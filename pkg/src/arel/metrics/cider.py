from __future__ import annotations

import math
from collections import Counter
from typing import Hashable, Sequence

from .bleu import ngrams

Tokens = Sequence[Hashable]
MAX_N = 4


class CorpusStats:
    """Document frequencies of n-grams, one document per album's reference set."""

    def __init__(self, corpus_refs: Sequence[Sequence[Tokens]]):
        self.n_docs = len(corpus_refs)
        self.df: Counter = Counter()
        for refs in corpus_refs:
            seen = set()
            for ref in refs:
                for k in range(1, MAX_N + 1):
                    seen.update(ngrams(ref, k))
            self.df.update(seen)
        self.log_n = math.log(self.n_docs) if self.n_docs else 0.0

    def idf(self, gram: tuple) -> float:
        return self.log_n - math.log(max(1, self.df.get(gram, 0)))


def _tfidf(tokens: Tokens, k: int, stats: CorpusStats) -> dict:
    return {g: cnt * stats.idf(g) for g, cnt in ngrams(tokens, k).items()}


def _cosine(a: dict, b: dict) -> float:
    na = math.sqrt(sum(x * x for x in a.values()))
    nb = math.sqrt(sum(x * x for x in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    dot = sum(v * b[g] for g, v in a.items() if g in b)
    return dot / (na * nb)


def cider(hypothesis: Tokens, references: Sequence[Tokens], stats: CorpusStats) -> float:
    """Classic CIDEr (no length penalty): mean over n=1..4 of 10 x mean cosine to each reference."""
    if not hypothesis or not references:
        return 0.0
    total = 0.0
    for k in range(1, MAX_N + 1):
        h = _tfidf(hypothesis, k, stats)
        total += sum(_cosine(h, _tfidf(r, k, stats)) for r in references) / len(references)
    return 10.0 * total / MAX_N
