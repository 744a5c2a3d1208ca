"""Hill-climbing search for one token string that maximizes a metric averaged
over every album's references."""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Sequence

import numpy as np

from .scores import METRICS, score_all

Tokens = Sequence[Hashable]


def metric_attack(metric: str, corpus_refs: Sequence[Sequence[Tokens]], budget: int,
                  seed: int = 0, start: Tokens | None = None,
                  max_len: int = 110) -> tuple[list, dict[str, float]]:
    """Return the best string found and its corpus-mean score under every metric.

    Mutations: insert, delete, replace, swap adjacent; tokens are drawn from the
    reference vocabulary in proportion to frequency. A mutation is kept when it
    does not lower the target score, so the result never scores below ``start``.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}")
    counts = Counter(tok for refs in corpus_refs for ref in refs for tok in ref)
    if not counts:
        raise ValueError("no reference tokens")
    types = sorted(counts, key=lambda t: (-counts[t], str(t)))
    weights = np.array([counts[t] for t in types], dtype=np.float64)
    weights /= weights.sum()
    rng = np.random.default_rng(seed)
    current = list(start) if start is not None else [types[0]]
    target = METRICS[metric].corpus(corpus_refs)
    best = target(current)
    for _ in range(budget):
        cand = list(current)
        op = rng.integers(4)
        tok = types[rng.choice(len(types), p=weights)]
        if op == 0 and len(cand) < max_len:
            cand.insert(int(rng.integers(len(cand) + 1)), tok)
        elif op == 1 and len(cand) > 1:
            del cand[int(rng.integers(len(cand)))]
        elif op == 2 and cand:
            cand[int(rng.integers(len(cand)))] = tok
        elif op == 3 and len(cand) > 1:
            i = int(rng.integers(len(cand) - 1))
            cand[i], cand[i + 1] = cand[i + 1], cand[i]
        else:
            continue
        s = target(cand)
        if s >= best:
            current, best = cand, s
    return current, score_all_corpus(current, corpus_refs)


def score_all_corpus(hyp: Tokens, corpus_refs: Sequence[Sequence[Tokens]]) -> dict[str, float]:
    from .cider import CorpusStats

    stats = CorpusStats(corpus_refs)
    rows = [score_all(hyp, refs, stats) for refs in corpus_refs]
    return {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
