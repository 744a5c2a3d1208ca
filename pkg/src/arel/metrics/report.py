from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .cider import CorpusStats
from .scores import COLUMNS, score_all


def histogram(scores: Sequence[float], bucket_width: float = 0.05,
              upper: float = 1.0) -> list[tuple[float, int]]:
    """Left-closed, right-open buckets [k*w, (k+1)*w) covering [0, upper).

    Scores at or above ``upper`` land in the last bucket, negatives in the first.
    """
    if bucket_width <= 0:
        raise ValueError("bucket_width must be positive")
    n = int(math.ceil(upper / bucket_width - 1e-9))
    counts = [0] * n
    for s in scores:
        k = int(math.floor(s / bucket_width))
        # snap to the float bucket edges actually reported
        if k * bucket_width > s:
            k -= 1
        elif (k + 1) * bucket_width <= s:
            k += 1
        counts[min(max(k, 0), n - 1)] += 1
    return [(k * bucket_width, c) for k, c in enumerate(counts)]


@dataclass
class MetricReport:
    album_ids: list[str] = field(default_factory=list)
    rows: list[dict[str, float]] = field(default_factory=list)

    @property
    def means(self) -> dict[str, float]:
        return {c: float(np.mean([r[c] for r in self.rows])) if self.rows else 0.0 for c in COLUMNS}

    def column(self, name: str) -> list[float]:
        return [r[name] for r in self.rows]

    def histograms(self, width: float = 0.05) -> dict[str, list[tuple[float, int]]]:
        return {"B3": histogram(self.column("B3"), width),
                "C": histogram([c / 10.0 for c in self.column("C")], width)}

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("album_id",) + COLUMNS)
            for aid, row in zip(self.album_ids, self.rows):
                w.writerow([aid] + [f"{100 * row[c]:.4f}" for c in COLUMNS])
            means = self.means
            w.writerow(["mean"] + [f"{100 * means[c]:.4f}" for c in COLUMNS])

    def write_histograms(self, directory: str | Path, width: float = 0.05) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name, buckets in self.histograms(width).items():
            with open(directory / f"hist_{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("bucket_low", "count"))
                for low, count in buckets:
                    w.writerow((f"{low:.2f}", count))


def evaluate(album_ids: Sequence[str], hypotheses: Sequence[Sequence[Hashable]],
             corpus_refs: Sequence[Sequence[Sequence[Hashable]]],
             stats: CorpusStats | None = None) -> MetricReport:
    """Score each hypothesis against its album's references."""
    stats = stats or CorpusStats(corpus_refs)
    report = MetricReport()
    for aid, hyp, refs in zip(album_ids, hypotheses, corpus_refs):
        report.album_ids.append(aid)
        report.rows.append(score_all(hyp, refs, stats))
    return report
