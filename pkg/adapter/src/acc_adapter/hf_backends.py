"""Transformer-checkpoint backends for the embedder, classifier and
corrector roles.

The embedder returns one unit-norm contextual vector per input word
(subword states mean-pooled through the fast tokenizer's word map). The
classifier is a three-way sequence classifier over (question + prediction,
context). The corrector is a pointer model: per-word start/end scores over
the context, sent raw so the client side picks the best span.
"""

from __future__ import annotations

from typing import Sequence

WIRE_LABELS = ("wrong", "partially", "correct")


def _device(name: str):
    import torch

    return torch.device(name)


class HfEncoder:
    def __init__(self, model_path: str, device: str = "cpu", max_length: int = 512):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        if not self.tokenizer.is_fast:
            raise ValueError("embedder role needs a fast tokenizer (word-level pooling)")
        self.model = AutoModel.from_pretrained(model_path).to(_device(device)).eval()
        self.max_length = max_length
        self.torch = torch
        self._single_cache: dict[str, list[float]] = {}

    def _normalize(self, vec) -> list[float]:
        norm = float(self.torch.linalg.vector_norm(vec))
        if norm == 0.0:
            vec = self.torch.ones_like(vec)
            norm = float(self.torch.linalg.vector_norm(vec))
        return (vec / norm).tolist()

    def _encode_single(self, word: str) -> list[float]:
        cached = self._single_cache.get(word)
        if cached is None:
            enc = self.tokenizer(word, return_tensors="pt", truncation=True, max_length=self.max_length)
            with self.torch.no_grad():
                states = self.model(**enc).last_hidden_state[0]
            cached = self._single_cache[word] = self._normalize(states.mean(dim=0))
        return cached

    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        if not tokens:
            return []
        enc = self.tokenizer(
            list(tokens),
            is_split_into_words=True,
            return_tensors="pt",
            truncation=True,
            max_length=self.max_length,
        )
        with self.torch.no_grad():
            states = self.model(**enc).last_hidden_state[0]
        by_word: dict[int, list] = {}
        for pos, word_id in enumerate(enc.word_ids(0)):
            if word_id is not None:
                by_word.setdefault(word_id, []).append(states[pos])
        out = []
        for i, token in enumerate(tokens):
            if i in by_word:
                stacked = self.torch.stack(by_word[i])
                out.append(self._normalize(stacked.mean(dim=0)))
            else:
                # truncated away or yields no subwords: encode it alone
                out.append(self._encode_single(token))
        return out


class HfClassifier:
    def __init__(self, model_path: str, device: str = "cpu", max_length: int = 512):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = (
            AutoModelForSequenceClassification.from_pretrained(model_path).to(_device(device)).eval()
        )
        self.max_length = max_length
        self.torch = torch
        if self.model.config.num_labels != 3:
            raise ValueError(
                f"classifier checkpoint must have 3 labels, got {self.model.config.num_labels}"
            )
        id2label = {
            int(i): str(l).lower() for i, l in (self.model.config.id2label or {}).items()
        }
        if set(id2label.values()) == set(WIRE_LABELS):
            self.index_to_label = [id2label[i] for i in range(3)]
        else:
            self.index_to_label = list(WIRE_LABELS)

    def classify(self, question: str, context: str, prediction: str) -> str:
        enc = self.tokenizer(
            f"{question} {self.tokenizer.sep_token or ''} {prediction}".strip(),
            context,
            return_tensors="pt",
            truncation=True,
            max_length=self.max_length,
        )
        with self.torch.no_grad():
            logits = self.model(**enc).logits[0]
        return self.index_to_label[int(logits.argmax())]


class HfPointerCorrector:
    def __init__(self, model_path: str, device: str = "cpu", max_length: int = 512):
        import torch
        from transformers import AutoModelForQuestionAnswering, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        if not self.tokenizer.is_fast:
            raise ValueError("corrector role needs a fast tokenizer (word-level scores)")
        self.model = (
            AutoModelForQuestionAnswering.from_pretrained(model_path).to(_device(device)).eval()
        )
        self.max_length = max_length
        self.torch = torch

    def scores(self, question: str, context: str, prediction: str) -> tuple[list[float], list[float]]:
        context_words = context.split()
        query_words = f"{question} {prediction}".split()
        enc = self.tokenizer(
            query_words,
            context_words,
            is_split_into_words=True,
            return_tensors="pt",
            truncation="only_second",
            max_length=self.max_length,
        )
        with self.torch.no_grad():
            out = self.model(**enc)
        start = out.start_logits[0]
        end = out.end_logits[0]
        low = float(min(start.min(), end.min())) - 1.0
        st = [low] * len(context_words)
        ed = [low] * len(context_words)
        sequence_ids = enc.sequence_ids(0)
        word_ids = enc.word_ids(0)
        for pos, (seq, word_id) in enumerate(zip(sequence_ids, word_ids)):
            if seq != 1 or word_id is None or word_id >= len(context_words):
                continue
            st[word_id] = max(st[word_id], float(start[pos]))
            ed[word_id] = max(ed[word_id], float(end[pos]))
        return st, ed
