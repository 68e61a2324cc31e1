"""Span similarity: word overlap and greedy-matching BERTScore.

Token embeddings come from a pluggable provider; the built-in provider hashes
character n-grams so the whole toolkit runs deterministically with no model
service behind it.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np

from .norm import word_tokenize

DEFAULT_DIM = 128
DEFAULT_SEED = 0
# Shared component added to every token vector. Unrelated tokens then sit at
# a mildly positive cosine (~a^2/(1+a^2)) instead of zero-mean, which keeps
# one-shared-word span pairs above the default partial-correctness floor.
ANCHOR_WEIGHT = 0.5


class EmbeddingProvider(Protocol):
    """Maps a token list to one unit-norm vector per token, fixed dimension."""

    def embed(self, tokens: Sequence[str]) -> list[np.ndarray]: ...


class HashEmbedder:
    """Deterministic offline embedder from hashed character n-grams (n=2..4).

    Identical tokens map to identical vectors; tokens sharing n-grams get a
    higher cosine than unrelated ones. Vectors are unit-norm, read-only and
    cached per token.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED):
        self.dim = dim
        self._salt = seed.to_bytes(8, "little")
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, token: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        # Boundary markers so one-character tokens still yield n-grams.
        padded = "\x02" + token + "\x03"
        for n in (2, 3, 4):
            for i in range(len(padded) - n + 1):
                digest = hashlib.blake2b(
                    padded[i : i + n].encode("utf-8"), digest_size=8, salt=self._salt
                ).digest()
                h = int.from_bytes(digest, "little")
                vec[h % self.dim] += 1.0 if (h >> 40) & 1 else -1.0
        vec /= np.linalg.norm(vec)
        vec[0] += ANCHOR_WEIGHT
        vec /= np.linalg.norm(vec)
        vec.setflags(write=False)
        return vec

    def embed(self, tokens: Sequence[str]) -> list[np.ndarray]:
        out = []
        for tok in tokens:
            arr = self._cache.get(tok)
            if arr is None:
                arr = self._cache[tok] = self._vector(tok)
            out.append(arr)
        return out


_DEFAULT_EMBEDDER = HashEmbedder()


def default_embed(tokens: Sequence[str]) -> list[np.ndarray]:
    """Embed with the shared default :class:`HashEmbedder`."""
    return _DEFAULT_EMBEDDER.embed(tokens)


def word_overlap(pred: str, gold: str) -> float:
    """Distinct shared words over the larger word count of the two spans.

    Both spans are normalized and word-tokenized; 0.0 when either side is
    empty afterwards. Symmetric, in [0, 1].
    """
    pw = word_tokenize(pred)
    gw = word_tokenize(gold)
    if not pw or not gw:
        return 0.0
    return len(set(pw) & set(gw)) / max(len(pw), len(gw))


def similarity_matrix(
    cand_tokens: Sequence[str], ref_tokens: Sequence[str], provider: EmbeddingProvider
) -> np.ndarray:
    """Pairwise cosine matrix, rows = candidate tokens, cols = reference tokens."""
    x = np.asarray(provider.embed(cand_tokens), dtype=float)
    y = np.asarray(provider.embed(ref_tokens), dtype=float)
    xn = np.linalg.norm(x, axis=1)
    yn = np.linalg.norm(y, axis=1)
    if not (xn.all() and yn.all()):
        raise ValueError("embedding provider returned a zero-norm vector")
    return (x / xn[:, None]) @ (y / yn[:, None]).T


def bertscore(cand: str, ref: str, provider: EmbeddingProvider | None = None) -> float:
    """Greedy-matching cosine F1 between the two spans' token embeddings.

    Precision averages each candidate token's best cosine against the
    reference; recall averages each reference token's best cosine against the
    candidate; the result is their harmonic mean. No idf weighting, no
    rescaling. Empty token lists (or P + R = 0) give 0.0.
    """
    if provider is None:
        provider = _DEFAULT_EMBEDDER
    cand_tokens = word_tokenize(cand)
    ref_tokens = word_tokenize(ref)
    if not cand_tokens or not ref_tokens:
        return 0.0
    sim = similarity_matrix(cand_tokens, ref_tokens, provider)
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
