from .corpus import CorpusSpec, generate_corpus, read_corpus, split_corpus, write_corpus
from .run import Run, RewardReport, load_run, reward_report, save_run, train_run
from .stats import corpus_ratio

__all__ = ["CorpusSpec", "RewardReport", "Run", "corpus_ratio", "generate_corpus", "load_run",
           "read_corpus", "reward_report", "save_run", "split_corpus", "train_run", "write_corpus"]
