from __future__ import annotations

from typing import Hashable, Sequence

Tokens = Sequence[Hashable]

BETA = 1.2


def lcs_length(a: Tokens, b: Tokens) -> int:
    """Longest common subsequence length, bit-parallel over ``a``."""
    if not a or not b:
        return 0
    masks: dict = {}
    for i, tok in enumerate(a):
        masks[tok] = masks.get(tok, 0) | (1 << i)
    full = (1 << len(a)) - 1
    v = full
    for tok in b:
        u = v & masks.get(tok, 0)
        v = ((v + u) | (v - u)) & full
    return len(a) - bin(v).count("1")


def rouge_l(hypothesis: Tokens, references: Sequence[Tokens], beta: float = BETA) -> float:
    """LCS F-measure, best over references."""
    if not hypothesis:
        return 0.0
    best = 0.0
    b2 = beta * beta
    for ref in references:
        lcs = lcs_length(hypothesis, ref)
        if lcs == 0:
            continue
        p = lcs / len(hypothesis)
        r = lcs / len(ref)
        best = max(best, (1 + b2) * p * r / (r + b2 * p))
    return best
