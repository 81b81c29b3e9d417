"""Lexicon-based polarity/subjectivity scoring and per-class sentiment reports."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass

from .corpus import Corpus
from .preprocess import CleanConfig, clean


class LexiconError(Exception):
    pass


@dataclass(frozen=True)
class Sentiment:
    polarity: float
    subjectivity: float

    def __post_init__(self):
        if not -1.0 <= self.polarity <= 1.0:
            raise LexiconError(f"polarity {self.polarity} outside [-1,1]")
        if not 0.0 <= self.subjectivity <= 1.0:
            raise LexiconError(f"subjectivity {self.subjectivity} outside [0,1]")


@dataclass(frozen=True)
class Lexicon:
    entries: dict  # word -> (polarity, subjectivity)

    def __post_init__(self):
        for word, (pol, sub) in self.entries.items():
            if not -1.0 <= pol <= 1.0:
                raise LexiconError(f"{word!r}: polarity {pol} outside [-1,1]")
            if not 0.0 <= sub <= 1.0:
                raise LexiconError(f"{word!r}: subjectivity {sub} outside [0,1]")

    def __contains__(self, word):
        return word in self.entries

    def __len__(self):
        return len(self.entries)


def load_lexicon(path) -> Lexicon:
    """One `word polarity subjectivity` triple per line, whitespace-delimited."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise LexiconError(f"{path}:{ln}: expected 3 fields, got {len(parts)}")
            word = parts[0]
            try:
                pol, sub = float(parts[1]), float(parts[2])
            except ValueError:
                raise LexiconError(f"{path}:{ln}: non-numeric score")
            if not -1.0 <= pol <= 1.0 or not 0.0 <= sub <= 1.0:
                raise LexiconError(f"{path}:{ln}: score out of range")
            entries[word] = (pol, sub)
    return Lexicon(entries)


def score(text: str, lexicon: Lexicon) -> Sentiment:
    """Mean polarity/subjectivity over lexicon-matched tokens; (0,0) on no match."""
    matched = [lexicon.entries[tok] for tok in text.split() if tok in lexicon.entries]
    if not matched:
        return Sentiment(0.0, 0.0)
    n = len(matched)
    return Sentiment(sum(p for p, _ in matched) / n, sum(s for _, s in matched) / n)


def class_sentiment_report(corpus: Corpus, lexicon: Lexicon, config: CleanConfig) -> dict:
    """Per-class mean Sentiment over cleaned texts. Absent classes are omitted."""
    if len(corpus) == 0:
        raise LexiconError("sentiment report over an empty corpus")
    sums = defaultdict(lambda: [0.0, 0.0, 0])
    for ex in corpus:
        s = score(clean(ex.text, config), lexicon)
        acc = sums[ex.label]
        acc[0] += s.polarity
        acc[1] += s.subjectivity
        acc[2] += 1
    return {k: Sentiment(p / n, s / n) for k, (p, s, n) in sorted(sums.items())}


def report_to_json(report: dict) -> str:
    return json.dumps({str(k): {"polarity": v.polarity, "subjectivity": v.subjectivity}
                       for k, v in report.items()}, indent=2)
