from .attack import metric_attack
from .bleu import bleu
from .cider import CorpusStats, cider
from .meteor import align, meteor_lite
from .report import MetricReport, evaluate, histogram
from .rouge import lcs_length, rouge_l
from .scores import METRICS, score_all

__all__ = [
    "CorpusStats",
    "METRICS",
    "MetricReport",
    "align",
    "bleu",
    "cider",
    "evaluate",
    "histogram",
    "lcs_length",
    "meteor_lite",
    "metric_attack",
    "rouge_l",
    "score_all",
]
