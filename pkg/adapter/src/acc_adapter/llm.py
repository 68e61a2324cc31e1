"""LLM-backed roles: prompt rendering, answer-envelope parsing, demo retrieval.

Prompts come from the shipped template files (``prompts/``); the model must
answer with a ``{"answer": "..."}`` JSON envelope. Few-shot demonstrations
are drawn from a newline-delimited demo pool, optionally ranked by BM25 over
the question text.
"""

from __future__ import annotations

import json
import math
import os
import re
from collections import Counter
from pathlib import Path
from typing import Callable, Sequence

PROMPT_DIR = Path(__file__).parent / "prompts"

LABEL_PHRASES = {
    "partially": "partially correct prediction",
    "wrong": "wrong prediction",
    "correct": "correct prediction",
}


class EnvelopeError(ValueError):
    """The model reply did not carry a parseable answer envelope."""

    def __init__(self, message: str, raw: str):
        super().__init__(f"{message}; raw reply: {raw!r}")
        self.raw = raw


def load_prompt(path: str | Path | None, role: str) -> str:
    if path is None:
        path = PROMPT_DIR / f"{role}.txt"
    return Path(path).read_text(encoding="utf-8")


def render_prompt(template: str, **slots: str) -> str:
    # plain replacement: the templates contain literal JSON braces
    out = template
    for key, value in slots.items():
        out = out.replace("{" + key + "}", value)
    return out


_ENVELOPE_RE = re.compile(r"\{[^{}]*\"answer\"[^{}]*\}", re.DOTALL)


def parse_envelope(reply: str) -> str:
    """Extract the "answer" value from the model reply."""
    match = _ENVELOPE_RE.search(reply)
    if not match:
        raise EnvelopeError("no answer envelope found", reply)
    try:
        obj = json.loads(match.group(0))
    except json.JSONDecodeError:
        raise EnvelopeError("answer envelope is not valid JSON", reply)
    answer = obj.get("answer")
    if not isinstance(answer, str):
        raise EnvelopeError("answer envelope has no string answer", reply)
    return answer


def parse_label(reply: str) -> str:
    """Map a classifier reply onto the wire label vocabulary."""
    answer = parse_envelope(reply).strip().lower()
    # "partially correct prediction" contains "correct", so order matters
    for label in ("partially", "wrong", "correct"):
        if label in answer:
            return label
    raise EnvelopeError(f"unrecognized class {answer!r}", reply)


# ---------------------------------------------------------------------------
# Demonstration retrieval


def _tokens(text: str) -> list[str]:
    return re.findall(r"\w+", text.lower())


class Bm25:
    """Small Okapi BM25 ranker over tokenized documents."""

    def __init__(self, docs: Sequence[str], k1: float = 1.5, b: float = 0.75):
        self.k1, self.b = k1, b
        self.docs = [_tokens(d) for d in docs]
        self.avgdl = sum(len(d) for d in self.docs) / len(self.docs) if self.docs else 0.0
        self.df: Counter = Counter()
        for doc in self.docs:
            self.df.update(set(doc))
        self.n = len(self.docs)

    def scores(self, query: str) -> list[float]:
        out = []
        q = _tokens(query)
        for doc in self.docs:
            tf = Counter(doc)
            score = 0.0
            for term in q:
                if term not in tf:
                    continue
                idf = math.log(1.0 + (self.n - self.df[term] + 0.5) / (self.df[term] + 0.5))
                denom = tf[term] + self.k1 * (1 - self.b + self.b * len(doc) / self.avgdl)
                score += idf * tf[term] * (1 + self.k1) / denom
            out.append(score)
        return out

    def top(self, query: str, n: int) -> list[int]:
        scored = self.scores(query)
        return sorted(range(len(scored)), key=lambda i: (-scored[i], i))[:n]


class DemoPool:
    """Few-shot demonstrations from a newline-delimited record file.

    Records need a "question" field; the remaining fields are whatever the
    role's formatter uses (reader: "context"/"answers", classifier:
    "context"/"prediction"/"label", corrector: "context"/"prediction"/
    "target").
    """

    def __init__(self, path: str | Path, use_bm25: bool = False):
        self.records = []
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    self.records.append(json.loads(line))
        self.bm25 = Bm25([r.get("question", "") for r in self.records]) if use_bm25 else None

    def select(self, query: str, n: int) -> list[dict]:
        if not self.records or n <= 0:
            return []
        if self.bm25 is None:
            return self.records[:n]
        return [self.records[i] for i in self.bm25.top(query, n)]


def format_demos(records: Sequence[dict], role: str) -> str:
    blocks = []
    for i, rec in enumerate(records, start=1):
        if role == "reader":
            answer = json.dumps({"answer": "#".join(rec.get("answers", []))}, ensure_ascii=False)
            blocks.append(
                f"Example {i}:\nPassage: {rec['context']}\nQuestion: {rec['question']}\n"
                f"Answer: {answer}\n"
            )
        elif role == "classifier":
            phrase = LABEL_PHRASES[rec["label"]]
            answer = json.dumps({"answer": phrase}, ensure_ascii=False)
            blocks.append(
                f"Example{i}:\nPassage: {rec['context']}\nQuestion: {rec['question']}\n"
                f"Candidate Answer: {rec['prediction']}\nOutput: {answer}\n"
            )
        else:
            answer = json.dumps({"answer": rec["target"]}, ensure_ascii=False)
            blocks.append(
                f"Example{i}:\nPassage: {rec['context']}\nQuestion: {rec['question']}\n"
                f"Original Answer: {rec['prediction']}\nOutput: {answer}\n"
            )
    return "".join(block + "\n" for block in blocks)


# ---------------------------------------------------------------------------
# Completion client and roles

Completer = Callable[[str], str]


class OpenAiChatClient:
    """Minimal chat-completions client for any OpenAI-compatible endpoint."""

    def __init__(self, base_url: str, model: str, api_key_env: str = "OPENAI_API_KEY", timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = os.environ.get(api_key_env, "")
        self.timeout = timeout

    def __call__(self, prompt: str) -> str:
        import httpx

        response = httpx.post(
            f"{self.base_url}/chat/completions",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={
                "model": self.model,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": 0,
            },
            timeout=self.timeout,
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]


class LlmRole:
    def __init__(
        self,
        role: str,
        completer: Completer,
        template: str,
        demos: DemoPool | None = None,
        n_demos: int = 0,
    ):
        self.role = role
        self.completer = completer
        self.template = template
        self.demos = demos
        self.n_demos = n_demos

    def _prompt(self, question: str, passage: str, prediction: str = "") -> str:
        demo_text = ""
        if self.demos is not None:
            demo_text = format_demos(self.demos.select(question, self.n_demos), self.role)
        return render_prompt(
            self.template, demos=demo_text, passage=passage, question=question, prediction=prediction
        )

    def read(self, question: str, context: str) -> list[str]:
        answer = parse_envelope(self.completer(self._prompt(question, context)))
        return [span.strip() for span in answer.split("#") if span.strip()]

    def classify(self, question: str, context: str, prediction: str) -> str:
        return parse_label(self.completer(self._prompt(question, context, prediction)))

    def correct(self, question: str, context: str, prediction: str) -> str:
        return parse_envelope(self.completer(self._prompt(question, context, prediction)))
