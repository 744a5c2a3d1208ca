from __future__ import annotations

import math
from collections import Counter
from typing import Hashable, Sequence

Tokens = Sequence[Hashable]

SMOOTH_EPS = 1e-9


def ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def closest_ref_length(hyp_len: int, refs: Sequence[Tokens]) -> int:
    return min((abs(len(r) - hyp_len), len(r)) for r in refs)[1]


def bleu(hypothesis: Tokens, references: Sequence[Tokens], n: int = 4) -> float:
    """Sentence BLEU-n with clipped counts and a 1e-9 floor on zero matches."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not hypothesis or not references:
        return 0.0
    c = len(hypothesis)
    log_p = 0.0
    for k in range(1, n + 1):
        hyp = ngrams(hypothesis, k)
        max_ref: Counter = Counter()
        for ref in references:
            for g, cnt in ngrams(ref, k).items():
                if cnt > max_ref[g]:
                    max_ref[g] = cnt
        clipped = sum(min(cnt, max_ref[g]) for g, cnt in hyp.items())
        denom = max(c - k + 1, 0)
        p = max(clipped, SMOOTH_EPS) / denom if denom else SMOOTH_EPS
        log_p += math.log(p)
    r = closest_ref_length(c, references)
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_p / n)
