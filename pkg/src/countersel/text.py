"""Deterministic tokenization and n-gram extraction.

Every stage that looks at raw text (metrics, pruning, generation, tf-idf
selection) shares this tokenizer so token boundaries agree across the
whole pipeline and with external score producers. The rule is spelled
out so it can be reimplemented elsewhere: lowercase the text, split on
Unicode whitespace, and emit each punctuation character (Unicode
category P*) as its own token. No stemming, no stopword removal.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens, punctuation standing alone.

    Pure function of the input; stable across runs and platforms (no
    locale or regex-engine dependence). Empty input gives an empty list.
    """
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        if ch.isspace():
            if current:
                tokens.append("".join(current))
                current = []
        elif _is_punct(ch):
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


@dataclass(frozen=True)
class NGramCounts:
    """Sliding-window n-gram counts for one token sequence."""

    n: int
    counts: dict[tuple[str, ...], int]
    total: int


def ngrams(tokens: list[str], n: int) -> NGramCounts:
    """Count the order-n sliding-window n-grams of a token sequence.

    ``total`` is ``max(0, len(tokens) - n + 1)`` and always equals the
    sum of the counts.
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    total = max(0, len(tokens) - n + 1)
    counts = Counter(tuple(tokens[i : i + n]) for i in range(total))
    return NGramCounts(n=n, counts=dict(counts), total=total)
