"""Exact-match and partial-match precision/recall/F1 for multi-span answers.

Per question, predictions and golds are deduplicated after normalization so
both metrics score the same item universe. Exact match gives binary credit
for normalized set membership; partial match gives fractional credit from
the longest common contiguous word run between a span and its best
counterpart. Dataset scores micro-aggregate the per-question credits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ._kernels import lcs_word_length
from .norm import normalize_answer


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @staticmethod
    def from_credits(pred_credit: float, n_preds: float, gold_credit: float, n_golds: float) -> "PRF":
        p = pred_credit / n_preds if n_preds else 0.0
        r = gold_credit / n_golds if n_golds else 0.0
        f1 = 2.0 * p * r / (p + r) if p + r else 0.0
        return PRF(p, r, f1)


@dataclass(frozen=True)
class MatchCounts:
    """Per-question credit accumulator; credits never exceed their counts."""

    pred_credit: float
    gold_credit: float
    n_preds: int
    n_golds: int

    def prf(self) -> PRF:
        return PRF.from_credits(self.pred_credit, self.n_preds, self.gold_credit, self.n_golds)


def _dedup_normalized(texts: Iterable[str]) -> list[str]:
    seen = []
    for t in texts:
        n = normalize_answer(t)
        if n not in seen:
            seen.append(n)
    return seen


def em_counts(preds: Sequence[str], golds: Iterable[str]) -> MatchCounts:
    """Binary credit: a prediction scores 1 iff it equals some gold after normalization."""
    pred_set = set(_dedup_normalized(preds))
    gold_set = set(_dedup_normalized(golds))
    credit = len(pred_set & gold_set)
    return MatchCounts(credit, credit, len(pred_set), len(gold_set))


def pm_counts(preds: Sequence[str], golds: Iterable[str]) -> MatchCounts:
    """Fractional credit from the longest common contiguous word run.

    Each deduplicated prediction earns max_g |lcs(p, g)| / |p| and each gold
    earns max_p |lcs(p, g)| / |g|; spans that normalize to nothing earn 0 but
    still count in the denominators.
    """
    pred_words = [n.split() for n in _dedup_normalized(preds)]
    gold_words = [n.split() for n in _dedup_normalized(golds)]
    pred_credit = 0.0
    for pw in pred_words:
        if pw and gold_words:
            pred_credit += max(lcs_word_length(pw, gw) for gw in gold_words) / len(pw)
    gold_credit = 0.0
    for gw in gold_words:
        if gw and pred_words:
            gold_credit += max(lcs_word_length(pw, gw) for pw in pred_words) / len(gw)
    return MatchCounts(pred_credit, gold_credit, len(pred_words), len(gold_words))


def aggregate_micro(counts: Iterable[MatchCounts]) -> PRF:
    """Micro-aggregate per-question counts into a dataset PRF.

    A question with no golds and no predictions is an exact match on "no
    answer" and contributes full credit on both sides; an empty iterable
    gives an all-zero PRF.
    """
    pred_credit = gold_credit = 0.0
    n_preds = n_golds = 0
    for c in counts:
        if c.n_preds == 0 and c.n_golds == 0:
            pred_credit += 1.0
            gold_credit += 1.0
            n_preds += 1
            n_golds += 1
        else:
            pred_credit += c.pred_credit
            gold_credit += c.gold_credit
            n_preds += c.n_preds
            n_golds += c.n_golds
    return PRF.from_credits(pred_credit, n_preds, gold_credit, n_golds)


def score_dataset(
    question_preds: Sequence[Sequence[str]], question_golds: Sequence[Iterable[str]]
) -> dict[str, PRF]:
    """EM and PM PRF over aligned per-question prediction/gold lists."""
    if len(question_preds) != len(question_golds):
        raise ValueError("prediction and gold lists are not aligned")
    golds = [list(g) for g in question_golds]
    em = aggregate_micro(em_counts(p, g) for p, g in zip(question_preds, golds))
    pm = aggregate_micro(pm_counts(p, g) for p, g in zip(question_preds, golds))
    return {"em": em, "pm": pm}
