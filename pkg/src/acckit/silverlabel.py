"""Silver-labeled training data construction via K-fold heldout sampling.

The toolkit emits per-fold train/heldout manifests, consumes heldout
prediction files produced by any external trainer, annotates them with the
taxonomy, and builds the class-balanced classifier dataset (1:1:1) and the
corrector dataset (modify : no-modify = 2:1). Everything is seeded and
byte-reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .dataio import DatasetError, DatasetFile, Example
from .norm import find_span_occurrences, normalize_answer
from .similarity import EmbeddingProvider
from .taxonomy import Label, Thresholds, classify_prediction


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignment: dict[str, int]

    def heldout_ids(self, fold: int) -> list[str]:
        return sorted(eid for eid, f in self.assignment.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(eid for eid, f in self.assignment.items() if f != fold)


def split_folds(dataset: Sequence[Example], k: int, seed: int = 0) -> FoldPlan:
    """Partition examples into K folds of near-equal size (differ by <= 1).

    Deterministic: shuffle ids under the seed, then deal them out round-robin.
    """
    if k < 2:
        raise ValueError(f"fold count must be >= 2, got {k}")
    if len(dataset) < k:
        raise ValueError(f"cannot split {len(dataset)} examples into {k} folds")
    ids = [ex.id for ex in dataset]
    random.Random(seed).shuffle(ids)
    return FoldPlan(k, seed, {eid: i % k for i, eid in enumerate(ids)})


@dataclass(frozen=True)
class ClassifierRecord:
    example_id: str
    question: str
    context: str
    prediction: str
    label: Label
    best_gold: str | None = None

    def to_json(self) -> str:
        rec = {
            "question": self.question,
            "context": self.context,
            "prediction": self.prediction,
            "label": self.label.value,
        }
        return json.dumps(rec, ensure_ascii=False)


@dataclass(frozen=True)
class CorrectorRecord:
    example_id: str
    question: str
    context: str
    prediction: str
    target: str
    target_span: tuple[int, int]
    requires_modification: bool

    def to_json(self) -> str:
        rec = {
            "question": self.question,
            "context": self.context,
            "prediction": self.prediction,
            "target": self.target,
            "target_span": list(self.target_span),
            "requires_modification": self.requires_modification,
        }
        return json.dumps(rec, ensure_ascii=False)


def annotate_fold_predictions(
    predictions: dict[str, list[str]],
    dataset: DatasetFile,
    thresholds: Thresholds | None = None,
    provider: EmbeddingProvider | None = None,
) -> list[ClassifierRecord]:
    """Label every (example, prediction) pair with the taxonomy.

    Prediction ids must all exist in the dataset; offenders are listed in the
    error. Output order follows sorted example id, then file order.
    """
    by_id = dataset.by_id()
    unknown = sorted(set(predictions) - set(by_id))
    if unknown:
        raise DatasetError(f"predictions reference unknown example ids: {', '.join(unknown)}")
    records = []
    for eid in sorted(predictions):
        ex = by_id[eid]
        for pred in predictions[eid]:
            lp = classify_prediction(pred, ex.gold_texts, thresholds, provider)
            records.append(
                ClassifierRecord(
                    example_id=eid,
                    question=ex.question,
                    context=ex.context_text,
                    prediction=pred,
                    label=lp.label,
                    best_gold=lp.best_gold,
                )
            )
    return records


@dataclass
class BalanceReport:
    input_counts: dict[str, int] = field(default_factory=dict)
    output_counts: dict[str, int] = field(default_factory=dict)
    empty_classes: list[str] = field(default_factory=list)


def build_classifier_dataset(
    records: Sequence[ClassifierRecord], seed: int = 0
) -> tuple[list[ClassifierRecord], BalanceReport]:
    """Downsample to a strict 1:1:1 class balance.

    Each class is sampled uniformly at random (seeded) down to the minimum
    class count and the result is shuffled deterministically. If any class is
    empty the strict ratio forces an empty output; the report names the
    offenders.
    """
    by_label: dict[Label, list[ClassifierRecord]] = {label: [] for label in Label}
    for rec in records:
        by_label[rec.label].append(rec)
    report = BalanceReport(
        input_counts={label.value: len(by_label[label]) for label in Label}
    )
    report.empty_classes = [label.value for label in Label if not by_label[label]]
    if report.empty_classes:
        report.output_counts = {label.value: 0 for label in Label}
        return [], report
    rng = random.Random(seed)
    floor = min(len(v) for v in by_label.values())
    out: list[ClassifierRecord] = []
    for label in Label:
        out.extend(rng.sample(by_label[label], floor))
    rng.shuffle(out)
    report.output_counts = {label.value: floor for label in Label}
    return out, report


@dataclass
class CorrectorReport:
    n_modify: int = 0
    n_no_modify: int = 0
    skipped_gold_not_in_context: int = 0
    skipped_prediction_not_in_context: int = 0
    diagnostics: list[str] = field(default_factory=list)


def build_corrector_dataset(
    records: Sequence[ClassifierRecord],
    dataset: DatasetFile,
    seed: int = 0,
) -> tuple[list[CorrectorRecord], CorrectorReport]:
    """Build span-correction training pairs at a 2:1 modify:no-modify ratio.

    Modification examples come from partially correct records whose best gold
    occurs verbatim (normalized) in the context; the target is that gold's
    first occurrence. No-modification examples come from correct records with
    the prediction itself as target. Records whose target span cannot be
    located in the context are skipped and counted. The no-modify side is
    rounded down; when too few no-modify candidates exist, the modify side is
    downsampled to keep the ratio.
    """
    by_id = dataset.by_id()
    report = CorrectorReport()
    modify: list[CorrectorRecord] = []
    no_modify: list[CorrectorRecord] = []
    for rec in records:
        ex = by_id.get(rec.example_id)
        if ex is None:
            raise DatasetError(f"record references unknown example id: {rec.example_id}")
        context_words = list(ex.context_words)
        if rec.label is Label.PARTIALLY:
            if rec.best_gold is None:
                report.skipped_gold_not_in_context += 1
                continue
            hits = find_span_occurrences(rec.best_gold, context_words)
            if not hits:
                report.skipped_gold_not_in_context += 1
                continue
            i, j = hits[0]
            target = " ".join(context_words[i : j + 1])
            modify.append(
                CorrectorRecord(
                    example_id=rec.example_id,
                    question=rec.question,
                    context=rec.context,
                    prediction=rec.prediction,
                    target=target,
                    target_span=(i, j),
                    requires_modification=normalize_answer(rec.prediction)
                    != normalize_answer(target),
                )
            )
        elif rec.label is Label.CORRECT:
            hits = find_span_occurrences(rec.prediction, context_words)
            if not hits:
                report.skipped_prediction_not_in_context += 1
                continue
            i, j = hits[0]
            target = " ".join(context_words[i : j + 1])
            no_modify.append(
                CorrectorRecord(
                    example_id=rec.example_id,
                    question=rec.question,
                    context=rec.context,
                    prediction=rec.prediction,
                    target=target,
                    target_span=(i, j),
                    requires_modification=False,
                )
            )
    rng = random.Random(seed)
    no_modify_count = min(len(no_modify), len(modify) // 2)
    if len(no_modify) < len(modify) // 2:
        # Not enough no-modify candidates for the ratio; shrink the other side.
        modify_count = 2 * no_modify_count
        report.diagnostics.append(
            f"only {len(no_modify)} no-modification candidates for "
            f"{len(modify)} modification examples; modify side downsampled to {modify_count}"
        )
    else:
        modify_count = len(modify)
    if not modify:
        report.diagnostics.append("no modification examples available; corrector dataset is empty")
        modify_count = no_modify_count = 0
    out = rng.sample(modify, modify_count) + rng.sample(no_modify, no_modify_count)
    rng.shuffle(out)
    report.n_modify = modify_count
    report.n_no_modify = no_modify_count
    return out, report


def write_records(records: Iterable, out: TextIO) -> None:
    """Write annotation or training records as newline-delimited JSON."""
    for rec in records:
        out.write(rec.to_json() + "\n")


def write_fold_manifests(plan: FoldPlan, out_dir: str | Path) -> list[Path]:
    """Write the fold plan plus per-fold train/heldout id manifests."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    plan_path = out_dir / "fold_plan.ndjson"
    with plan_path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"k": plan.k, "seed": plan.seed}) + "\n")
        for eid in sorted(plan.assignment):
            fh.write(json.dumps({"id": eid, "fold": plan.assignment[eid]}) + "\n")
    written.append(plan_path)
    for fold in range(plan.k):
        for kind, ids in (("train", plan.train_ids(fold)), ("heldout", plan.heldout_ids(fold))):
            path = out_dir / f"fold_{fold}.{kind}.ids"
            path.write_text("".join(eid + "\n" for eid in ids), encoding="utf-8")
            written.append(path)
    return written
