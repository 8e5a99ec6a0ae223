"""Multi-document abstractive summarization with graph attention, plus extractive baselines."""

__version__ = "0.1.0"
