"""Three-way labeling of predictions against a gold answer set.

A prediction is correct when it exactly matches a gold answer after
normalization, partially correct when some gold clears both the word-overlap
and embedding-score floors, and wrong otherwise. This labeler is the ground
truth used by the silver-label builder, the oracle backends and the analysis
reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .norm import normalize_answer
from .similarity import EmbeddingProvider, bertscore, word_overlap


class Label(str, Enum):
    CORRECT = "correct"
    PARTIALLY = "partially"
    WRONG = "wrong"


@dataclass(frozen=True)
class Thresholds:
    """Partial-correctness floors: word overlap >= alpha and score >= beta."""

    alpha: float = 0.25
    beta: float = 0.6

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha out of [0, 1]: {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta out of [0, 1]: {self.beta}")


@dataclass(frozen=True)
class LabeledPrediction:
    prediction: str
    label: Label
    best_gold: str | None = None
    wo: float = 0.0
    bs: float = 0.0


def _best(scored: list[tuple[float, float, str]]) -> tuple[float, float, str]:
    """Pick by highest WO, then highest BS, then lexicographic normalized gold."""
    return min(scored, key=lambda t: (-t[0], -t[1], normalize_answer(t[2]), t[2]))


def classify_prediction(
    pred: str,
    golds: Iterable[str],
    thresholds: Thresholds | None = None,
    provider: EmbeddingProvider | None = None,
) -> LabeledPrediction:
    """Label one prediction against a gold answer set.

    Exact normalized equality with any gold wins outright (wo and bs are
    reported as 1.0 by definition). Otherwise the prediction is partially
    correct when some gold has WO >= alpha and BS >= beta, with the best gold
    chosen by (WO, BS, lexicographic normalized gold). A prediction with no
    qualifying gold is wrong; its best_gold is the overall (WO, BS) maximizer,
    or absent when there are no golds at all.
    """
    t = thresholds or Thresholds()
    golds = list(golds)
    norm_pred = normalize_answer(pred)
    exact = [g for g in golds if normalize_answer(g) == norm_pred]
    if exact:
        best = min(exact, key=lambda g: (normalize_answer(g), g))
        return LabeledPrediction(pred, Label.CORRECT, best, 1.0, 1.0)
    if not golds:
        return LabeledPrediction(pred, Label.WRONG, None, 0.0, 0.0)
    scored = [(word_overlap(pred, g), bertscore(pred, g, provider), g) for g in golds]
    qualifying = [s for s in scored if s[0] >= t.alpha and s[1] >= t.beta]
    if qualifying:
        wo, bs, best = _best(qualifying)
        return LabeledPrediction(pred, Label.PARTIALLY, best, wo, bs)
    wo, bs, best = _best(scored)
    return LabeledPrediction(pred, Label.WRONG, best, wo, bs)


@dataclass
class AnnotatedSet:
    labeled: list[LabeledPrediction]
    counts: dict[Label, int] = field(default_factory=dict)


def annotate_prediction_set(
    preds: Sequence[str],
    golds: Iterable[str],
    thresholds: Thresholds | None = None,
    provider: EmbeddingProvider | None = None,
) -> AnnotatedSet:
    """Label each prediction independently and tally the three types."""
    golds = list(golds)
    labeled = [classify_prediction(p, golds, thresholds, provider) for p in preds]
    counts = {label: 0 for label in Label}
    for lp in labeled:
        counts[lp.label] += 1
    return AnnotatedSet(labeled, counts)
