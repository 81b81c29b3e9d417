"""Vocabulary, integer encoding, post-padding, embedding tables and nearest-neighbor lookup."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

PAD_INDEX = 0
UNIFORM_INIT_RANGE = 0.05


class EmbedError(Exception):
    pass


@dataclass(frozen=True)
class Vocab:
    word_to_index: dict  # 1-based dense indices; 0 reserved for padding

    def __post_init__(self):
        indices = sorted(self.word_to_index.values())
        if indices != list(range(1, len(indices) + 1)):
            raise EmbedError("vocab indices must be dense 1..size")

    def __len__(self):
        return len(self.word_to_index)

    def __contains__(self, word):
        return word in self.word_to_index

    def index(self, word):
        return self.word_to_index[word]

    def words(self):
        # index order
        return [w for w, _ in sorted(self.word_to_index.items(), key=lambda kv: kv[1])]


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: dict  # word -> np.ndarray of shape (dim,)
    dim: int

    def __post_init__(self):
        for word, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise EmbedError(f"{word!r}: vector of dim {vec.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise EmbedError(f"{word!r}: non-finite embedding component")

    def __contains__(self, word):
        return word in self.vectors

    def __len__(self):
        return len(self.vectors)


def build_vocab(token_lists, num_words: int) -> Vocab:
    if num_words < 1:
        raise EmbedError(f"num_words must be >= 1, got {num_words}")
    counts = Counter()
    first_seen = {}
    pos = 0
    for tokens in token_lists:
        for tok in tokens:
            counts[tok] += 1
            if tok not in first_seen:
                first_seen[tok] = pos
                pos += 1
    if not counts:
        raise EmbedError("cannot build vocab from an empty corpus")
    ranked = sorted(counts, key=lambda w: (-counts[w], first_seen[w]))
    return Vocab({w: i + 1 for i, w in enumerate(ranked[:num_words])})


def encode(tokens, vocab: Vocab) -> list[int]:
    # out-of-vocab tokens are dropped, not mapped to an unknown index
    return [vocab.word_to_index[t] for t in tokens if t in vocab.word_to_index]


def pad(seq, max_len: int) -> list[int]:
    if max_len < 1:
        raise EmbedError(f"max_len must be >= 1, got {max_len}")
    if len(seq) >= max_len:
        return list(seq[:max_len])
    return list(seq) + [PAD_INDEX] * (max_len - len(seq))


def load_embeddings(path, dim: int) -> EmbeddingTable:
    vectors = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip().split(" ")
            if len(parts) != dim + 1:
                raise EmbedError(f"{path}:{ln}: expected {dim} components, got {len(parts) - 1}")
            word = parts[0]
            if word in vectors:
                continue
            try:
                vectors[word] = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbedError(f"{path}:{ln}: non-numeric component")
    return EmbeddingTable(vectors, dim)


def save_embeddings(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, vec in table.vectors.items():
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def build_matrix(vocab: Vocab, table: EmbeddingTable | None, dim: int, init_seed: int = 0) -> np.ndarray:
    """(len(vocab)+1, dim) matrix; row 0 is the zero padding row, missing words
    get uniform [-0.05, 0.05] init."""
    if table is not None and table.dim != dim:
        raise EmbedError(f"table dim {table.dim} != requested dim {dim}")
    rng = np.random.default_rng(init_seed)
    matrix = np.zeros((len(vocab) + 1, dim), dtype=np.float64)
    for word, idx in vocab.word_to_index.items():
        if table is not None and word in table.vectors:
            matrix[idx] = table.vectors[word]
        else:
            matrix[idx] = rng.uniform(-UNIFORM_INIT_RANGE, UNIFORM_INIT_RANGE, size=dim)
    return matrix


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def nearest_neighbor(word: str, table: EmbeddingTable, k: int = 1) -> list[str]:
    """k most cosine-similar words, query excluded, ties broken lexicographically."""
    if word not in table.vectors:
        raise EmbedError(f"unknown word {word!r}")
    if k < 1:
        raise EmbedError(f"k must be >= 1, got {k}")
    query = table.vectors[word]
    scored = [(-cosine(query, vec), w) for w, vec in table.vectors.items() if w != word]
    scored.sort()
    return [w for _, w in scored[:k]]
