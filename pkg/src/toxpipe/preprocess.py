"""Ordered tweet-cleaning pipeline: lowercase, URLs, mentions, hashtags, emoji, slang, stripping."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

URL_RE = re.compile(r"(?:https?://|www\.)\S*")
MENTION_RE = re.compile(r"@\S*")
# keep letters, digits and whitespace from any script; drop the rest
SPECIAL_RE = re.compile(r"[^\w\s]|_", re.UNICODE)
WS_RE = re.compile(r"\s+")


class WordMapError(Exception):
    pass


def _check_map(m: dict) -> dict:
    if any(k == "" for k in m):
        raise WordMapError("word map contains an empty key")
    return dict(m)


@dataclass(frozen=True)
class CleanConfig:
    lowercase: bool = True
    strip_mentions: bool = True
    strip_urls: bool = True
    keep_hashtag_text: bool = True
    emoji_map: dict = field(default_factory=dict)
    slang_map: dict = field(default_factory=dict)
    strip_special: bool = True

    def __post_init__(self):
        object.__setattr__(self, "emoji_map", _check_map(self.emoji_map))
        object.__setattr__(self, "slang_map", _check_map(self.slang_map))


def expand_slang(text: str, word_map: dict) -> str:
    # whole-token replacement only; no substring hits
    return " ".join(word_map.get(tok, tok) for tok in text.split())


def emoji_to_text(text: str, word_map: dict) -> str:
    for emoji, word in word_map.items():
        text = text.replace(emoji, f" {word} ")
    return text


def clean(text: str, config: CleanConfig) -> str:
    if config.lowercase:
        text = text.lower()
    if config.strip_urls:
        text = URL_RE.sub(" ", text)
    if config.strip_mentions:
        text = MENTION_RE.sub(" ", text)
    if config.keep_hashtag_text:
        text = text.replace("#", "")
    if config.emoji_map:
        text = emoji_to_text(text, config.emoji_map)
    if config.strip_special:
        text = SPECIAL_RE.sub(" ", text)
    # slang runs after stripping so punctuation-adjacent tokens still match,
    # keeping clean idempotent
    if config.slang_map:
        text = expand_slang(text, config.slang_map)
    return WS_RE.sub(" ", text).strip()


def load_word_map(path) -> dict:
    """One `key<TAB>value` pair per line; `#`-prefixed comment lines ignored."""
    word_map = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise WordMapError(f"{path}:{ln}: expected key<TAB>value")
            key, value = line.split("\t", 1)
            if not key:
                raise WordMapError(f"{path}:{ln}: empty key")
            word_map[key] = value
    return word_map
