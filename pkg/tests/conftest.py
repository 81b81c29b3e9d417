import numpy as np
import pytest

from toxpipe.corpus import Corpus, LabeledExample
from toxpipe.embed import EmbeddingTable
from toxpipe.model import EncodedDataset


@pytest.fixture
def toy_table():
    vecs = {
        "good": np.array([1.0, 0.1, 0.0]),
        "great": np.array([1.0, 0.12, 0.0]),
        "dog": np.array([0.0, 1.0, 0.1]),
        "puppy": np.array([0.0, 1.0, 0.12]),
        "car": np.array([0.1, 0.0, 1.0]),
    }
    return EmbeddingTable(vecs, 3)


def make_corpus(labels, texts=None):
    examples = []
    for i, label in enumerate(labels):
        votes = [0, 0, 0]
        votes[label] = 3
        text = texts[i] if texts else f"tweet number {i} class {label}"
        examples.append(LabeledExample(id=i, count=3, votes=tuple(votes),
                                       label=label, text=text))
    return Corpus(tuple(examples))


def write_csv(path, rows):
    lines = ["count,hate_speech,offensive_language,neither,class,tweet"]
    lines += rows
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def keyword_disjoint_dataset(n, seed, vocab=60, max_len=32, min_len=5, max_tokens=20):
    """3-class synthetic set where class k draws tokens only from its own pool."""
    rng = np.random.default_rng(seed)
    pools = [np.arange(1 + 20 * k, 1 + 20 * (k + 1)) for k in range(3)]
    ids = np.zeros((n, max_len), dtype=np.int64)
    labels = rng.integers(0, 3, size=n)
    max_tokens = min(max_tokens, max_len)
    min_len = min(min_len, max_tokens)
    for i in range(n):
        length = rng.integers(min_len, max_tokens + 1)
        ids[i, :length] = rng.choice(pools[labels[i]], size=length)
    return EncodedDataset(ids, labels)
