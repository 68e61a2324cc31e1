"""Canonical dataset format and the BIO-tagged importer.

Canonical files are newline-delimited UTF-8 JSON: a header line
``{"acc_format": 1, "name": ..., "alpha": ..., "beta": ...}`` followed by one
record per example: ``{"id", "question", "context_words", "golds"}`` where
each gold is ``{"text", "span"}`` with an optional inclusive word-index pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

FORMAT_VERSION = 1

BIO_TAGS = {"B", "I", "O"}


class DatasetError(ValueError):
    """Malformed dataset or predictions input."""


@dataclass(frozen=True)
class Gold:
    text: str
    span: tuple[int, int] | None = None


@dataclass(frozen=True)
class Example:
    id: str
    question: str
    context_words: tuple[str, ...]
    golds: tuple[Gold, ...]

    @property
    def context_text(self) -> str:
        return " ".join(self.context_words)

    @property
    def gold_texts(self) -> list[str]:
        return [g.text for g in self.golds]


@dataclass
class DatasetFile:
    examples: list[Example]
    name: str = ""
    alpha: float | None = None
    beta: float | None = None

    def by_id(self) -> dict[str, Example]:
        return {ex.id: ex for ex in self.examples}


def _parse_gold(obj: dict, where: str) -> Gold:
    span = obj.get("span")
    if span is not None:
        if len(span) != 2 or span[0] > span[1] or span[0] < 0:
            raise DatasetError(f"{where}: bad gold span {span!r}")
        span = (int(span[0]), int(span[1]))
    return Gold(text=obj["text"], span=span)


def read_dataset(path: str | Path) -> DatasetFile:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as e:
            raise DatasetError(f"{path}: unparseable header line: {e}") from e
        if header.get("acc_format") != FORMAT_VERSION:
            raise DatasetError(f"{path}: missing or unsupported acc_format header")
        examples = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                examples.append(
                    Example(
                        id=str(rec["id"]),
                        question=rec["question"],
                        context_words=tuple(rec["context_words"]),
                        golds=tuple(
                            _parse_gold(g, f"{path}:{lineno}") for g in rec.get("golds", [])
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise DatasetError(f"{path}:{lineno}: bad example record: {e}") from e
    return DatasetFile(
        examples, name=header.get("name", ""), alpha=header.get("alpha"), beta=header.get("beta")
    )


def write_dataset(ds: DatasetFile, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        header: dict = {"acc_format": FORMAT_VERSION, "name": ds.name}
        if ds.alpha is not None:
            header["alpha"] = ds.alpha
        if ds.beta is not None:
            header["beta"] = ds.beta
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for ex in ds.examples:
            rec = {
                "id": ex.id,
                "question": ex.question,
                "context_words": list(ex.context_words),
                "golds": [
                    {"text": g.text, "span": list(g.span) if g.span else None} for g in ex.golds
                ],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def decode_bio(tags: Iterable[str], where: str = "") -> tuple[list[tuple[int, int]], int]:
    """Decode B(I)* runs into inclusive span index pairs.

    An I with no live run is repaired by treating it as B; the repair count
    is returned alongside the spans. Unknown tags raise.
    """
    tags = list(tags)
    spans: list[tuple[int, int]] = []
    start = None
    repairs = 0
    for i, tag in enumerate(tags):
        if tag not in BIO_TAGS:
            raise DatasetError(f"{where}: unknown BIO tag {tag!r} at token {i}")
        if tag == "B":
            if start is not None:
                spans.append((start, i - 1))
            start = i
        elif tag == "I":
            if start is None:
                repairs += 1
                start = i
        else:
            if start is not None:
                spans.append((start, i - 1))
                start = None
    if start is not None:
        spans.append((start, len(tags) - 1))
    return spans, repairs


def encode_bio(ex: Example) -> list[str]:
    """Tags reproducing the example's gold spans; requires offsets on every gold."""
    tags = ["O"] * len(ex.context_words)
    for g in ex.golds:
        if g.span is None:
            raise DatasetError(f"example {ex.id}: gold {g.text!r} has no span offsets")
        i, j = g.span
        tags[i] = "B"
        for k in range(i + 1, j + 1):
            tags[k] = "I"
    return tags


def import_bio(path: str | Path, name: str = "") -> tuple[DatasetFile, int]:
    """Import newline-delimited BIO records into a canonical dataset.

    Each line holds ``{"id"?, "question", "context": [tokens], "tags": [...]}``
    with the question given as a string or token list. Returns the dataset
    and the number of orphan-I repairs applied.
    """
    path = Path(path)
    examples = []
    total_repairs = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{where}: unparseable record: {e}") from e
            try:
                question = rec["question"]
                context = list(rec["context"])
                tags = list(rec["tags"])
            except (KeyError, TypeError) as e:
                raise DatasetError(f"{where}: missing field: {e}") from e
            if isinstance(question, list):
                question = " ".join(question)
            if len(tags) != len(context):
                raise DatasetError(
                    f"{where}: {len(tags)} tags for {len(context)} context tokens"
                )
            spans, repairs = decode_bio(tags, where)
            total_repairs += repairs
            golds = tuple(
                Gold(text=" ".join(context[i : j + 1]), span=(i, j)) for i, j in spans
            )
            examples.append(
                Example(
                    id=str(rec.get("id", f"q{lineno}")),
                    question=question,
                    context_words=tuple(context),
                    golds=golds,
                )
            )
    return DatasetFile(examples, name=name), total_repairs


@dataclass
class DatasetDiagnostics:
    n_examples: int = 0
    duplicate_ids: list[str] = field(default_factory=list)
    bad_offsets: list[str] = field(default_factory=list)
    empty_contexts: list[str] = field(default_factory=list)
    answer_counts: dict[str, int] = field(default_factory=lambda: {"multi": 0, "single": 0, "none": 0})
    avg_answer_number: float = 0.0
    avg_context_length: float = 0.0
    avg_question_length: float = 0.0

    @property
    def answer_proportions(self) -> dict[str, float]:
        n = self.n_examples or 1
        return {k: v / n for k, v in self.answer_counts.items()}

    @property
    def ok(self) -> bool:
        return not (self.duplicate_ids or self.bad_offsets or self.empty_contexts)


def validate_dataset(ds: DatasetFile) -> DatasetDiagnostics:
    """Structural checks plus corpus statistics; never raises on content."""
    diag = DatasetDiagnostics(n_examples=len(ds.examples))
    seen_ids = set()
    total_answers = total_context = total_question = 0
    for ex in ds.examples:
        if ex.id in seen_ids:
            diag.duplicate_ids.append(ex.id)
        seen_ids.add(ex.id)
        if not ex.context_words:
            diag.empty_contexts.append(ex.id)
        for g in ex.golds:
            if g.span is not None:
                i, j = g.span
                if j >= len(ex.context_words) or " ".join(ex.context_words[i : j + 1]) != g.text:
                    diag.bad_offsets.append(f"{ex.id}: {g.text!r} at {g.span}")
        n = len(ex.golds)
        key = "multi" if n >= 2 else ("single" if n == 1 else "none")
        diag.answer_counts[key] += 1
        total_answers += n
        total_context += len(ex.context_words)
        total_question += len(ex.question.split())
    if ds.examples:
        diag.avg_answer_number = total_answers / len(ds.examples)
        diag.avg_context_length = total_context / len(ds.examples)
        diag.avg_question_length = total_question / len(ds.examples)
    return diag


def read_predictions(path: str | Path) -> dict[str, list[str]]:
    """Read a newline-delimited predictions file into an id -> spans map."""
    path = Path(path)
    preds: dict[str, list[str]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                preds[str(rec["id"])] = [str(p) for p in rec["predictions"]]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise DatasetError(f"{path}:{lineno}: bad prediction record: {e}") from e
    return preds


def write_predictions(preds: dict[str, list[str]], out: str | Path | TextIO) -> None:
    """Write an id -> spans map as newline-delimited records, sorted by id."""
    if isinstance(out, (str, Path)):
        with Path(out).open("w", encoding="utf-8") as fh:
            write_predictions(preds, fh)
        return
    for qid in sorted(preds):
        out.write(json.dumps({"id": qid, "predictions": preds[qid]}, ensure_ascii=False) + "\n")
