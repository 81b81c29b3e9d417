"""toxpipe: hate/offensive/neither tweet classification pipeline.

Corpus validation, cleaning, lexicon sentiment, augmentation-based
rebalancing, a from-scratch bidirectional-LSTM classifier, a frozen-encoder
transfer head, random-search tuning, and cost-sensitive evaluation.
"""

from importlib import resources


def default_data_path(name: str):
    """Path to one of the bundled data files (slang.tsv, emoji.tsv,
    stopwords.txt, lexicon.txt)."""
    return resources.files("toxpipe").joinpath("data", name)


__version__ = "0.1.0"
