"""Deterministic built-in models (``--model hash``).

These need no weights or network: a char-n-gram hash encoder for the
embedder role and word-matching heuristics for the other roles. They exist
so protocol conformance, smoke tests and end-to-end runs work on any
machine; real quality comes from the transformer and LLM backends.
"""

from __future__ import annotations

import hashlib
from typing import Sequence


def _clean(text: str) -> list[str]:
    return [w for w in text.lower().split() if w]


class HashEncoder:
    """Unit-norm vectors from hashed character n-grams (n=2..4), fixed seed."""

    def __init__(self, dim: int = 128, seed: int = 0):
        if dim < 2:
            raise ValueError(f"embedding dim must be >= 2, got {dim}")
        self.dim = dim
        self._salt = seed.to_bytes(8, "little")
        self._cache: dict[str, list[float]] = {}

    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        return [self._vector(t) for t in tokens]

    def _vector(self, token: str) -> list[float]:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        vec = [0.0] * self.dim
        padded = "\x02" + token + "\x03"
        for n in (2, 3, 4):
            for i in range(len(padded) - n + 1):
                digest = hashlib.blake2b(
                    padded[i : i + n].encode("utf-8"), digest_size=8, salt=self._salt
                ).digest()
                h = int.from_bytes(digest, "little")
                vec[h % self.dim] += 1.0 if (h >> 40) & 1 else -1.0
        norm = sum(v * v for v in vec) ** 0.5
        vec = [v / norm for v in vec]
        self._cache[token] = vec
        return vec


class HeuristicClassifier:
    """correct when the prediction occurs verbatim in the context, partially
    when it shares any word, wrong otherwise."""

    def classify(self, question: str, context: str, prediction: str) -> str:
        ctx = _clean(context)
        pred = _clean(prediction)
        if not pred:
            return "wrong"
        n = len(pred)
        if any(ctx[i : i + n] == pred for i in range(len(ctx) - n + 1)):
            return "correct"
        if set(pred) & set(ctx):
            return "partially"
        return "wrong"


class HeuristicCorrector:
    """Pointer-style scores: context words shared with the prediction get
    weight 1. The downstream argmax picks the densest short span."""

    def scores(self, question: str, context: str, prediction: str) -> tuple[list[float], list[float]]:
        ctx = context.split()
        pred = set(_clean(prediction))
        st = [1.0 if w.lower() in pred else 0.0 for w in ctx]
        return st, list(st)


class HeuristicReader:
    """Up to two capitalized word runs from the context, else the first word."""

    def read(self, question: str, context: str) -> list[str]:
        words = context.split()
        spans, run = [], []
        for w in words:
            if w[:1].isupper():
                run.append(w)
            elif run:
                spans.append(" ".join(run))
                run = []
        if run:
            spans.append(" ".join(run))
        if not spans and words:
            spans = [words[0]]
        return spans[:2]
