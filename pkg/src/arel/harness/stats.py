from __future__ import annotations

import math
from typing import Iterable

from ..data import Album


def corpus_ratio(albums: Iterable[Album], set_a: Iterable[str], set_b: Iterable[str]) -> float:
    """Occurrences of tokens in ``set_a`` over occurrences of ``set_b`` across all references.

    Returns ``math.inf`` when set B never occurs; raises when neither occurs.
    """
    a, b = set(set_a), set(set_b)
    if not a or not b:
        raise ValueError("token sets must be non-empty")
    if a & b:
        raise ValueError("token sets must be disjoint")
    na = nb = 0
    for album in albums:
        for ref in album.references:
            for sent in ref:
                for tok in sent:
                    na += tok in a
                    nb += tok in b
    if na == 0 and nb == 0:
        raise ValueError("neither token set occurs in the corpus")
    return math.inf if nb == 0 else na / nb
