"""METEOR-lite: exact-match unigram alignment only (no stemming, synonyms or
paraphrases). Not comparable to official METEOR scores."""

from __future__ import annotations

from collections import defaultdict
from typing import Hashable, Sequence

Tokens = Sequence[Hashable]

# references up to this length always get the exact alignment search
EXACT_MAX_REF = 10
# memo-table size above which the exact search on longer references gives up
EXACT_STATE_BUDGET = 2_000


class _Budget(Exception):
    pass


def count_chunks(pairs: Sequence[tuple[int, int]]) -> int:
    """Chunks in an alignment given as (hyp_pos, ref_pos) pairs."""
    pairs = sorted(pairs)
    if not pairs:
        return 0
    chunks = 1
    for (h0, r0), (h1, r1) in zip(pairs, pairs[1:]):
        if not (h1 == h0 + 1 and r1 == r0 + 1):
            chunks += 1
    return chunks


def _exact(hyp: Tokens, ref: Tokens, budget: float = float("inf")) -> tuple[int, int]:
    positions = defaultdict(list)
    for j, tok in enumerate(ref):
        positions[tok].append(j)
    memo: dict = {}
    n = len(hyp)

    # best (matches, -chunks) over hyp[i:] given used ref positions and the
    # ref position matched to hyp[i-1] (-1 if unmatched)
    def solve(i: int, used: int, prev: int) -> tuple[int, int]:
        if i == n:
            return (0, 0)
        key = (i, used, prev)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) > budget:
            raise _Budget
        best = solve(i + 1, used, -1)
        for j in positions.get(hyp[i], ()):
            if used >> j & 1:
                continue
            m, neg_c = solve(i + 1, used | (1 << j), j)
            cand = (m + 1, neg_c - (0 if prev >= 0 and j == prev + 1 else 1))
            if cand > best:
                best = cand
        memo[key] = best
        return best

    m, neg_c = solve(0, 0, -1)
    return m, -neg_c


def _greedy(hyp: Tokens, ref: Tokens) -> tuple[int, int]:
    # repeatedly align the longest common run of still-unmatched tokens
    hu = [False] * len(hyp)
    ru = [False] * len(ref)
    pairs = []
    while True:
        best = (0, 0, 0)
        for i in range(len(hyp)):
            if hu[i]:
                continue
            for j in range(len(ref)):
                k = 0
                while (i + k < len(hyp) and j + k < len(ref) and not hu[i + k] and not ru[j + k]
                       and hyp[i + k] == ref[j + k]):
                    k += 1
                if k > best[0]:
                    best = (k, i, j)
        k, i, j = best
        if k == 0:
            break
        for d in range(k):
            hu[i + d] = ru[j + d] = True
            pairs.append((i + d, j + d))
    return len(pairs), count_chunks(pairs)


def align(hyp: Tokens, ref: Tokens) -> tuple[int, int]:
    """(matches, chunks) of a maximum exact-match alignment with fewest chunks.

    Exact search for short references and, for longer ones, within a state
    budget; beyond it a longest-run-first greedy alignment is used (still
    maximum matches, possibly more chunks).
    """
    budget = float("inf") if len(ref) <= EXACT_MAX_REF else EXACT_STATE_BUDGET
    try:
        return _exact(hyp, ref, budget)
    except (_Budget, RecursionError):
        return _greedy(hyp, ref)


def meteor_lite(hypothesis: Tokens, references: Sequence[Tokens]) -> float:
    best = 0.0
    for ref in references:
        if not hypothesis or not ref:
            continue
        m, chunks = align(hypothesis, ref)
        if m == 0:
            continue
        p = m / len(hypothesis)
        r = m / len(ref)
        fmean = 10 * p * r / (r + 9 * p)
        penalty = 0.5 * (chunks / m) ** 3
        best = max(best, fmean * (1 - penalty))
    return best
