"""Diagnostic reports: label distributions, classifier confusion, corrector
change matrices and before/after span-quality averages."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .norm import normalize_answer
from .similarity import EmbeddingProvider
from .taxonomy import Label, LabeledPrediction, Thresholds, classify_prediction

LABEL_ORDER = (Label.WRONG, Label.PARTIALLY, Label.CORRECT)


def round_half_up(value: float, places: int = 2) -> float:
    """Round half away from zero, matching printed table percentages."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def distribution_report(
    labeled_runs: dict[str, Sequence[LabeledPrediction]],
) -> dict[str, dict[str, int]]:
    """Per-model counts of correct / partially / wrong predictions."""
    out = {}
    for name, labeled in labeled_runs.items():
        counts = {label.value: 0 for label in Label}
        for lp in labeled:
            counts[lp.label.value] += 1
        out[name] = counts
    return out


@dataclass
class ConfusionMatrix3:
    """3x3 counts indexed (true label, predicted label), wrong/partially/correct order."""

    counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def count(self, true: Label | str, pred: Label | str) -> int:
        return self.counts.get((str(Label(true).value), str(Label(pred).value)), 0)

    def row_total(self, true: Label | str) -> int:
        t = Label(true).value
        return sum(v for (tt, _), v in self.counts.items() if tt == t)

    def row_percentages(self, true: Label | str) -> dict[str, float]:
        total = self.row_total(true)
        return {
            p.value: round_half_up(100.0 * self.count(true, p) / total) if total else 0.0
            for p in LABEL_ORDER
        }

    def to_rows(self) -> list[dict]:
        rows = []
        for t in LABEL_ORDER:
            pct = self.row_percentages(t)
            rows.append(
                {
                    "true": t.value,
                    **{p.value: self.count(t, p) for p in LABEL_ORDER},
                    **{f"{p.value}_pct": pct[p.value] for p in LABEL_ORDER},
                }
            )
        return rows


def classifier_confusion(pairs: Iterable[tuple[Label | str, Label | str]]) -> ConfusionMatrix3:
    """Tally (true label, predicted label) pairs."""
    matrix = ConfusionMatrix3()
    for true, pred in pairs:
        key = (Label(true).value, Label(pred).value)
        matrix.counts[key] = matrix.counts.get(key, 0) + 1
    return matrix


@dataclass
class ChangeMatrix2:
    """2x2 counts of exact-match correctness before vs after correction."""

    incorrect_to_incorrect: int = 0
    incorrect_to_correct: int = 0
    correct_to_incorrect: int = 0
    correct_to_correct: int = 0

    @property
    def total(self) -> int:
        return (
            self.incorrect_to_incorrect
            + self.incorrect_to_correct
            + self.correct_to_incorrect
            + self.correct_to_correct
        )

    def percentage(self, cell: str) -> float:
        return round_half_up(100.0 * getattr(self, cell) / self.total) if self.total else 0.0

    def to_rows(self) -> list[dict]:
        return [
            {
                "before": before,
                "incorrect": getattr(self, f"{before}_to_incorrect"),
                "correct": getattr(self, f"{before}_to_correct"),
                "incorrect_pct": self.percentage(f"{before}_to_incorrect"),
                "correct_pct": self.percentage(f"{before}_to_correct"),
            }
            for before in ("incorrect", "correct")
        ]


def corrector_change_matrix(
    before: Sequence[str],
    after: Sequence[str],
    golds: Sequence[Iterable[str]],
) -> ChangeMatrix2:
    """Classify each aligned (before, after) pair by exact normalized membership."""
    if not (len(before) == len(after) == len(golds)):
        raise ValueError(
            f"before/after/golds lengths differ: {len(before)}/{len(after)}/{len(golds)}"
        )
    matrix = ChangeMatrix2()
    for b, a, gs in zip(before, after, golds):
        gold_set = {normalize_answer(g) for g in gs}
        b_ok = normalize_answer(b) in gold_set
        a_ok = normalize_answer(a) in gold_set
        cell = f"{'correct' if b_ok else 'incorrect'}_to_{'correct' if a_ok else 'incorrect'}"
        setattr(matrix, cell, getattr(matrix, cell) + 1)
    return matrix


@dataclass
class QualityReport:
    before_wo: float = 0.0
    before_bs: float = 0.0
    after_wo: float = 0.0
    after_bs: float = 0.0
    n_before: int = 0
    n_after: int = 0

    @property
    def delta_wo(self) -> float:
        return self.after_wo - self.before_wo

    @property
    def delta_bs(self) -> float:
        return self.after_bs - self.before_bs


def quality_report(
    before_sets: Sequence[Sequence[str]],
    after_sets: Sequence[Sequence[str]],
    golds: Sequence[Iterable[str]],
    thresholds: Thresholds | None = None,
    provider: EmbeddingProvider | None = None,
) -> QualityReport:
    """Average best-gold WO and BS across all predictions, before vs after.

    Each prediction scores against its best gold under the taxonomy rule (an
    exact match scores 1.0/1.0). Empty prediction sets average to 0 with the
    prediction counters left at zero as the flag.
    """
    if not (len(before_sets) == len(after_sets) == len(golds)):
        raise ValueError("before/after/golds question lists are not aligned")
    gold_lists = [list(g) for g in golds]

    def averages(pred_sets: Sequence[Sequence[str]]) -> tuple[float, float, int]:
        wo_sum = bs_sum = 0.0
        n = 0
        for preds, gs in zip(pred_sets, gold_lists):
            for pred in preds:
                lp = classify_prediction(pred, gs, thresholds, provider)
                wo_sum += lp.wo
                bs_sum += lp.bs
                n += 1
        if n == 0:
            return 0.0, 0.0, 0
        return wo_sum / n, bs_sum / n, n

    report = QualityReport()
    report.before_wo, report.before_bs, report.n_before = averages(before_sets)
    report.after_wo, report.after_bs, report.n_after = averages(after_sets)
    return report
