"""Answer-classify-correct orchestration over pluggable backends.

A pipeline run takes each example's initial predictions through classify and
correct stages according to the selected mode, and keeps a full per-example
trace (initial predictions, labels, corrections, final set). Backends are
duck-typed: ``reader.read(ex)``, ``classifier.classify(ex, pred)`` and
``corrector.correct(ex, pred)``.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Protocol, Sequence

from ._kernels import best_span
from .dataio import Example
from .norm import normalize_answer
from .taxonomy import Label, LabeledPrediction

DEFAULT_MAX_SPAN_WORDS = 30


class PipelineMode(str, Enum):
    STANDARD = "standard"
    CLS_ONLY = "cls-only"
    COR_ONLY = "cor-only"
    COR_THEN_CLS = "cor-then-cls"
    BINARY_CLS_COR = "binary-cls-cor"


class Reader(Protocol):
    def read(self, ex: Example) -> list[str]: ...


class Classifier(Protocol):
    def classify(self, ex: Example, prediction: str) -> Label: ...


class Corrector(Protocol):
    def correct(self, ex: Example, prediction: str) -> str: ...


@dataclass(frozen=True)
class SpanScores:
    """Per-token start/end scores from a pointer-style corrector."""

    st: tuple[float, ...]
    ed: tuple[float, ...]

    def __post_init__(self):
        if len(self.st) != len(self.ed):
            raise ValueError(f"start/end score lengths differ: {len(self.st)} != {len(self.ed)}")
        if not all(math.isfinite(v) for v in self.st + self.ed):
            raise ValueError("span scores must be finite")


def select_best_span(scores: SpanScores, max_span_words: int = DEFAULT_MAX_SPAN_WORDS) -> tuple[int, int]:
    """Best (i, j) with i <= j and j - i + 1 <= max_span_words by st[i] + ed[j].

    Ties break toward the smaller i, then the smaller j. Empty score arrays
    signal malformed backend output and raise ValueError.
    """
    return best_span(scores.st, scores.ed, max_span_words)


@dataclass
class Partition:
    correct: list[LabeledPrediction] = field(default_factory=list)
    partially: list[LabeledPrediction] = field(default_factory=list)
    wrong: list[LabeledPrediction] = field(default_factory=list)


def partition(labeled: Iterable[LabeledPrediction]) -> Partition:
    """Split labeled predictions by label, preserving order within each part."""
    part = Partition()
    buckets = {Label.CORRECT: part.correct, Label.PARTIALLY: part.partially, Label.WRONG: part.wrong}
    for lp in labeled:
        buckets[lp.label].append(lp)
    return part


def dedup_normalized(texts: Iterable[str]) -> list[str]:
    """Drop later entries whose normalized form was already seen."""
    seen = set()
    out = []
    for t in texts:
        key = normalize_answer(t)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


@dataclass
class PipelineResult:
    example_id: str
    predictions: list[str]
    # Parallel to predictions except in cor-then-cls mode, where labels
    # describe the corrected texts.
    labels: list[Label | None]
    corrected: list[str | None]
    final: list[str]
    partition: Partition | None = None


def run_pipeline(
    ex: Example,
    reader: Reader,
    classifier: Classifier | None,
    corrector: Corrector | None,
    mode: PipelineMode = PipelineMode.STANDARD,
) -> PipelineResult:
    """Run one example through the selected post-processing mode.

    standard: classify, drop wrong, correct the partially correct.
    cls-only: classify and drop wrong, no correction.
    cor-only: correct every prediction, no classification.
    cor-then-cls: correct everything first, then classify and drop wrong.
    binary-cls-cor: classify, drop wrong, correct everything kept.

    Final sets are deduplicated after normalization; empty finals are legal.
    """
    preds = list(reader.read(ex))
    labels: list[Label | None] = [None] * len(preds)
    corrected: list[str | None] = [None] * len(preds)
    part: Partition | None = None

    def classify_all(texts: Sequence[str]) -> list[Label]:
        if classifier is None:
            raise ValueError(f"mode {mode.value} needs a classifier")
        return [classifier.classify(ex, t) for t in texts]

    def correct_one(text: str) -> str:
        if corrector is None:
            raise ValueError(f"mode {mode.value} needs a corrector")
        return corrector.correct(ex, text)

    if mode is PipelineMode.STANDARD:
        labels = list(classify_all(preds))
        part = partition(LabeledPrediction(p, l) for p, l in zip(preds, labels))
        final = []
        for i, (p, label) in enumerate(zip(preds, labels)):
            if label is Label.CORRECT:
                final.append(p)
            elif label is Label.PARTIALLY:
                corrected[i] = correct_one(p)
                final.append(corrected[i])
    elif mode is PipelineMode.CLS_ONLY:
        labels = list(classify_all(preds))
        part = partition(LabeledPrediction(p, l) for p, l in zip(preds, labels))
        final = [p for p, label in zip(preds, labels) if label is not Label.WRONG]
    elif mode is PipelineMode.COR_ONLY:
        corrected = [correct_one(p) for p in preds]
        final = list(corrected)
    elif mode is PipelineMode.COR_THEN_CLS:
        corrected = [correct_one(p) for p in preds]
        labels = list(classify_all(corrected))
        part = partition(LabeledPrediction(c, l) for c, l in zip(corrected, labels))
        final = [c for c, label in zip(corrected, labels) if label is not Label.WRONG]
    elif mode is PipelineMode.BINARY_CLS_COR:
        labels = list(classify_all(preds))
        part = partition(LabeledPrediction(p, l) for p, l in zip(preds, labels))
        final = []
        for i, (p, label) in enumerate(zip(preds, labels)):
            if label is not Label.WRONG:
                corrected[i] = correct_one(p)
                final.append(corrected[i])
    else:  # pragma: no cover
        raise ValueError(f"unknown mode: {mode}")

    return PipelineResult(ex.id, preds, labels, corrected, dedup_normalized(final), part)


@dataclass
class BackendSet:
    reader: Reader
    classifier: Classifier | None = None
    corrector: Corrector | None = None

    def close(self) -> None:
        for backend in (self.reader, self.classifier, self.corrector):
            close = getattr(backend, "close", None)
            if close is not None:
                close()


@dataclass
class DatasetRun:
    results: list[PipelineResult]
    failures: list[tuple[str, str]]

    @property
    def failure_rate(self) -> float:
        total = len(self.results) + len(self.failures)
        return len(self.failures) / total if total else 0.0

    def final_predictions(self) -> dict[str, list[str]]:
        return {r.example_id: r.final for r in self.results}


def run_dataset(
    examples: Sequence[Example],
    backend_factory: Callable[[], BackendSet],
    mode: PipelineMode = PipelineMode.STANDARD,
    workers: int = 1,
) -> DatasetRun:
    """Run the pipeline over a dataset with one backend set per worker.

    Backend conversations stay sequential per connection; a protocol failure
    aborts only the example that hit it. Results come back sorted by example
    id regardless of scheduling.
    """
    from .backends import BackendError  # local import to avoid a cycle

    local = threading.local()
    opened: list[BackendSet] = []
    open_lock = threading.Lock()

    def get_backends() -> BackendSet:
        if getattr(local, "backends", None) is None:
            backends = backend_factory()
            with open_lock:
                opened.append(backends)
            local.backends = backends
        return local.backends

    def run_one(ex: Example) -> tuple[str, PipelineResult | None, str | None]:
        try:
            backends = get_backends()
            result = run_pipeline(ex, backends.reader, backends.classifier, backends.corrector, mode)
            return ex.id, result, None
        except BackendError as e:
            return ex.id, None, str(e)

    try:
        if workers <= 1:
            outcomes = [run_one(ex) for ex in examples]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run_one, examples))
    finally:
        for backends in opened:
            backends.close()

    results = sorted((r for _, r, err in outcomes if err is None), key=lambda r: r.example_id)
    failures = sorted((eid, err) for eid, _, err in outcomes if err is not None)
    return DatasetRun(results, failures)
