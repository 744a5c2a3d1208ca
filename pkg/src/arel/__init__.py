"""Adversarial reward learning for multi-sentence story generation from feature sequences."""

__version__ = "0.1.0"
