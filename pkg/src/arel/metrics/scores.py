from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .bleu import bleu
from .cider import CorpusStats, cider
from .meteor import meteor_lite
from .rouge import rouge_l

Tokens = Sequence[Hashable]
COLUMNS = ("B1", "B2", "B3", "B4", "M", "R", "C")


def score_all(hyp: Tokens, refs: Sequence[Tokens], stats: CorpusStats) -> dict[str, float]:
    """Raw scores (BLEU/METEOR/ROUGE in [0,1], CIDEr in [0,10])."""
    out = {f"B{n}": bleu(hyp, refs, n) for n in range(1, 5)}
    out["M"] = meteor_lite(hyp, refs)
    out["R"] = rouge_l(hyp, refs)
    out["C"] = cider(hyp, refs, stats)
    return out


@dataclass(frozen=True)
class Metric:
    name: str
    needs_stats: bool
    fn: Callable

    def bind(self, stats: CorpusStats | None = None) -> Callable[[Tokens, Sequence[Tokens]], float]:
        if self.needs_stats:
            return lambda hyp, refs: self.fn(hyp, refs, stats)
        return self.fn

    def corpus(self, corpus_refs: Sequence[Sequence[Tokens]]) -> Callable[[Tokens], float]:
        """Mean score of one hypothesis against every album's references."""
        f = self.bind(CorpusStats(corpus_refs) if self.needs_stats else None)
        return lambda hyp: float(np.mean([f(hyp, refs) for refs in corpus_refs]))


METRICS = {
    "bleu": Metric("bleu", False, lambda h, r: bleu(h, r, 4)),
    "bleu-3": Metric("bleu-3", False, lambda h, r: bleu(h, r, 3)),
    "rouge-l": Metric("rouge-l", False, rouge_l),
    "cider": Metric("cider", True, cider),
    "meteor-lite": Metric("meteor-lite", False, meteor_lite),
}
