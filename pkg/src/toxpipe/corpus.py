"""Labeled tweet corpus: CSV ingestion, integrity checks, class balance, splits."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

EXPECTED_COLUMNS = ["count", "hate_speech", "offensive_language", "neither", "class", "tweet"]
CLASS_NAMES = {0: "hate", 1: "offensive", 2: "neither"}


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class LabeledExample:
    id: int
    count: int
    votes: tuple[int, int, int]
    label: int
    text: str
    synthetic: bool = False

    def __post_init__(self):
        if sum(self.votes) != self.count:
            raise CorpusError(f"row {self.id}: votes {self.votes} do not sum to count {self.count}")
        if self.label not in (0, 1, 2):
            raise CorpusError(f"row {self.id}: label {self.label} outside {{0,1,2}}")
        if any(v < 0 for v in self.votes):
            raise CorpusError(f"row {self.id}: negative vote count")


@dataclass(frozen=True)
class Corpus:
    examples: tuple[LabeledExample, ...]

    def __len__(self):
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i):
        return self.examples[i]

    def labels(self) -> list[int]:
        return [ex.label for ex in self.examples]

    def texts(self) -> list[str]:
        return [ex.text for ex in self.examples]


@dataclass(frozen=True)
class ValidationReport:
    missing_cells: list[tuple[int, str]]
    duplicate_texts: list[list[int]]
    equal_vote_rows: list[int]
    label_contradictions: list[int]

    def is_clean(self) -> bool:
        return not (self.missing_cells or self.duplicate_texts
                    or self.equal_vote_rows or self.label_contradictions)

    def to_json(self) -> str:
        return json.dumps({
            "missing_cells": [list(c) for c in self.missing_cells],
            "duplicate_texts": self.duplicate_texts,
            "equal_vote_rows": self.equal_vote_rows,
            "label_contradictions": self.label_contradictions,
            "clean": self.is_clean(),
        }, indent=2)


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if any(r <= 0 for r in self.ratios):
            raise CorpusError(f"all split ratios must be positive, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise CorpusError(f"split ratios must sum to 1, got {sum(self.ratios)}")


def load_csv(path) -> Corpus:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise CorpusError(f"no such file: {path}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty file, no header")
        # a leading unnamed (or arbitrary) index column is tolerated
        offset = 0
        if header[:6] != EXPECTED_COLUMNS:
            if len(header) >= 7 and header[1:7] == EXPECTED_COLUMNS:
                offset = 1
            else:
                missing = [c for c in EXPECTED_COLUMNS if c not in header]
                raise CorpusError(f"{path}: bad header, missing columns {missing}")
        examples = []
        for i, row in enumerate(reader):
            if not row:
                continue
            cells = row[offset:]
            if len(cells) < 6:
                raise CorpusError(f"{path} row {i}: expected 6 cells, got {len(cells)}")
            try:
                count = int(cells[0])
                votes = (int(cells[1]), int(cells[2]), int(cells[3]))
                label = int(cells[4])
            except ValueError as e:
                raise CorpusError(f"{path} row {i}: non-integer cell ({e})")
            if label not in (0, 1, 2):
                raise CorpusError(f"{path} row {i}: label {label} outside {{0,1,2}}")
            examples.append(LabeledExample(id=i, count=count, votes=votes,
                                           label=label, text=cells[5]))
    return Corpus(tuple(examples))


def save_csv(corpus: Corpus, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EXPECTED_COLUMNS)
        for ex in corpus:
            writer.writerow([ex.count, *ex.votes, ex.label, ex.text])


def validate(corpus: Corpus) -> ValidationReport:
    missing = []
    for ex in corpus:
        if ex.text == "":
            missing.append((ex.id, "tweet"))
    by_text = defaultdict(list)
    for ex in corpus:
        by_text[ex.text].append(ex.id)
    duplicates = [ids for ids in by_text.values() if len(ids) > 1]
    equal_vote = []
    contradictions = []
    for ex in corpus:
        top = max(ex.votes)
        if list(ex.votes).count(top) >= 2:
            equal_vote.append(ex.id)
        if ex.votes.index(top) != ex.label:
            contradictions.append(ex.id)
    return ValidationReport(missing_cells=missing, duplicate_texts=duplicates,
                            equal_vote_rows=equal_vote, label_contradictions=contradictions)


def class_distribution(corpus: Corpus) -> tuple[float, float, float]:
    if len(corpus) == 0:
        raise CorpusError("class_distribution of an empty corpus")
    counts = Counter(corpus.labels())
    n = len(corpus)
    return tuple(counts.get(k, 0) / n for k in (0, 1, 2))


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Deterministic (seeded) partition into train/val/test, optionally stratified."""
    n = len(corpus)
    rng = np.random.default_rng(spec.seed)

    def partition(indices):
        indices = np.array(indices)
        rng.shuffle(indices)
        m = len(indices)
        n_train = int(round(spec.ratios[0] * m))
        n_val = int(round(spec.ratios[1] * m))
        n_train = min(n_train, m)
        n_val = min(n_val, m - n_train)
        return (indices[:n_train], indices[n_train:n_train + n_val], indices[n_train + n_val:])

    if spec.stratified:
        parts = ([], [], [])
        for k in (0, 1, 2):
            idx_k = [i for i, ex in enumerate(corpus) if ex.label == k]
            if not idx_k:
                continue
            for part, sel in zip(parts, partition(idx_k)):
                part.extend(sel.tolist())
    else:
        parts = tuple(sel.tolist() for sel in partition(list(range(n))))

    if any(len(p) == 0 for p in parts):
        raise CorpusError(f"split with ratios {spec.ratios} leaves an empty part (n={n})")
    result = tuple(Corpus(tuple(corpus[i] for i in sorted(p))) for p in parts)
    return result
