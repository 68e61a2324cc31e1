"""Answer-text normalization and word tokenization.

Every string comparison in the toolkit (exact match, word overlap, taxonomy
labels, span lookup) goes through the same normalization: lowercase, strip
punctuation, drop the English articles "a"/"an"/"the" as whole words, and
collapse whitespace.
"""

from __future__ import annotations

import unicodedata
from functools import lru_cache

ARTICLES = frozenset({"a", "an", "the"})


@lru_cache(maxsize=1 << 16)
def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@lru_cache(maxsize=1 << 16)
def normalize_answer(text: str) -> str:
    """Return the canonical form of an answer span.

    Lowercases, removes Unicode punctuation, drops article tokens and joins
    the remaining words with single spaces. Idempotent; "" maps to "".
    """
    text = text.lower()
    text = "".join(ch for ch in text if not _is_punct(ch))
    return " ".join(w for w in text.split() if w not in ARTICLES)


def word_tokenize(text: str) -> list[str]:
    """Split the normalized form of ``text`` into words."""
    return normalize_answer(text).split()


def find_span_occurrences(span: str, context_words: list[str]) -> list[tuple[int, int]]:
    """Find all word-index ranges of ``context_words`` matching ``span``.

    A window (i, j) matches when each context word, normalized on its own,
    equals the corresponding normalized span word. Returns inclusive index
    pairs ordered by start position; a span that normalizes to nothing has
    no occurrences.
    """
    target = word_tokenize(span)
    if not target:
        return []
    n = len(target)
    normed = [normalize_answer(w) for w in context_words]
    hits = []
    for i in range(len(normed) - n + 1):
        if normed[i : i + n] == target:
            hits.append((i, i + n - 1))
    return hits
