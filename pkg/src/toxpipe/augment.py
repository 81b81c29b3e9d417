"""Label-preserving text augmentation and training-set rebalancing."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, LabeledExample
from .embed import EmbeddingTable, nearest_neighbor

OPERATORS = ("synonym_replace", "random_insert", "random_swap", "random_delete")


class AugmentError(Exception):
    pass


@dataclass(frozen=True)
class AugmentPolicy:
    ops: tuple = (("synonym_replace", 2), ("random_insert", 1),
                  ("random_swap", 1), ("random_delete", 0.1))
    stopwords: frozenset = frozenset()
    seed: int = 0

    def __post_init__(self):
        for name, intensity in self.ops:
            if name not in OPERATORS:
                raise AugmentError(f"unknown operator {name!r}")
            if intensity < 0:
                raise AugmentError(f"{name}: negative intensity {intensity}")
            if name == "random_delete" and not 0.0 <= intensity <= 1.0:
                raise AugmentError(f"random_delete probability {intensity} outside [0,1]")

    @classmethod
    def from_json(cls, text: str) -> "AugmentPolicy":
        doc = json.loads(text)
        ops = tuple((op["name"], op["intensity"]) for op in doc.get("ops", []))
        stopwords = frozenset(doc.get("stopwords", []))
        if "stopword_file" in doc:
            with open(doc["stopword_file"], encoding="utf-8") as fh:
                stopwords = stopwords | {w.strip() for w in fh if w.strip()}
        return cls(ops=ops, stopwords=stopwords, seed=doc.get("seed", 0))


@dataclass(frozen=True)
class RebalanceTarget:
    # per-class target ratio relative to the majority-class count; None leaves a class alone
    ratios: tuple = (0.5, None, None)

    def __post_init__(self):
        for r in self.ratios:
            if r is not None and not 0.0 < r <= 1.0:
                raise AugmentError(f"target ratio {r} outside (0,1]")


def synonym_replace(tokens, k: int, table: EmbeddingTable, stopwords=frozenset(),
                    seed: int = 0) -> list:
    if k < 0:
        raise AugmentError(f"k must be >= 0, got {k}")
    tokens = list(tokens)
    eligible = [i for i, t in enumerate(tokens) if t not in stopwords and t in table]
    if k == 0 or not eligible:
        return tokens
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(eligible))[:k]
    for j in chosen:
        i = eligible[j]
        tokens[i] = nearest_neighbor(tokens[i], table, 1)[0]
    return tokens


def random_insert(tokens, n: int, table: EmbeddingTable, stopwords=frozenset(),
                  seed: int = 0) -> list:
    if n < 0:
        raise AugmentError(f"n must be >= 0, got {n}")
    tokens = list(tokens)
    rng = np.random.default_rng(seed)
    for _ in range(n):
        eligible = [t for t in tokens if t not in stopwords and t in table]
        if not eligible:
            break
        word = eligible[rng.integers(len(eligible))]
        synonym = nearest_neighbor(word, table, 1)[0]
        pos = int(rng.integers(len(tokens) + 1))
        tokens.insert(pos, synonym)
    return tokens


def random_swap(tokens, n: int, seed: int = 0) -> list:
    if n < 0:
        raise AugmentError(f"n must be >= 0, got {n}")
    tokens = list(tokens)
    if len(tokens) < 2:
        return tokens
    rng = np.random.default_rng(seed)
    for _ in range(n):
        i, j = rng.choice(len(tokens), size=2, replace=False)
        tokens[i], tokens[j] = tokens[j], tokens[i]
    return tokens


def random_delete(tokens, p: float, seed: int = 0) -> list:
    if not 0.0 <= p <= 1.0:
        raise AugmentError(f"p must be in [0,1], got {p}")
    tokens = list(tokens)
    if not tokens:
        return tokens
    rng = np.random.default_rng(seed)
    keep = rng.random(len(tokens)) >= p
    if not keep.any():
        keep[rng.integers(len(tokens))] = True
    return [t for t, k in zip(tokens, keep) if k]


def apply_policy(tokens, policy: AugmentPolicy, table: EmbeddingTable, seed: int) -> list:
    # each operator gets its own derived stream so intensities don't interact
    for step, (name, intensity) in enumerate(policy.ops):
        op_seed = seed * 1000003 + step
        if name == "synonym_replace":
            tokens = synonym_replace(tokens, int(intensity), table, policy.stopwords, op_seed)
        elif name == "random_insert":
            tokens = random_insert(tokens, int(intensity), table, policy.stopwords, op_seed)
        elif name == "random_swap":
            tokens = random_swap(tokens, int(intensity), op_seed)
        elif name == "random_delete":
            tokens = random_delete(tokens, float(intensity), op_seed)
    return tokens


def augment_example(example: LabeledExample, policy: AugmentPolicy,
                    table: EmbeddingTable) -> LabeledExample:
    """One synthetic variant of a cleaned example; label copied unchanged."""
    tokens = apply_policy(example.text.split(), policy, table,
                          seed=policy.seed ^ example.id)
    return LabeledExample(id=example.id, count=example.count, votes=example.votes,
                          label=example.label, text=" ".join(tokens), synthetic=True)


def rebalance(train: Corpus, target: RebalanceTarget, policy: AugmentPolicy,
              table: EmbeddingTable) -> Corpus:
    """Augment minority classes until count_k >= ratio_k * majority count.

    Originals are preserved verbatim; the result is shuffled deterministically
    by the policy seed."""
    if len(train) == 0:
        raise AugmentError("cannot rebalance an empty corpus")
    counts = Counter(train.labels())
    majority = max(counts.values())
    by_class = {k: [ex for ex in train if ex.label == k] for k in (0, 1, 2)}
    out = list(train)
    next_id = max(ex.id for ex in train) + 1
    for k, ratio in enumerate(target.ratios):
        if ratio is None:
            continue
        needed = int(np.ceil(ratio * majority)) - counts.get(k, 0)
        if needed <= 0:
            continue
        if not by_class[k]:
            raise AugmentError(f"class {k} has no examples to augment from")
        for i in range(needed):
            source = by_class[k][i % len(by_class[k])]
            variant_seed = policy.seed * 7919 + next_id
            variant = LabeledExample(
                id=next_id, count=source.count, votes=source.votes, label=source.label,
                text=" ".join(apply_policy(source.text.split(), policy, table, variant_seed)),
                synthetic=True)
            out.append(variant)
            next_id += 1
    order = np.random.default_rng(policy.seed).permutation(len(out))
    return Corpus(tuple(out[i] for i in order))
