"""Model-backend wire protocol plus offline oracle and identity backends.

One connection is one sequential conversation of newline-delimited UTF-8
JSON: ``{"id": N, "op": "read|classify|correct|embed", ...}`` answered by one
line carrying the same id and either a payload or an ``"error"`` string.
Backends run as child processes speaking over their standard streams, or
over a TCP socket with the identical line format. The built-in oracles make
the whole pipeline testable with no model service at all.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import socket
import subprocess
import time
from typing import Protocol, Sequence

import numpy as np

from .dataio import Example
from .norm import find_span_occurrences, normalize_answer
from .pipeline import DEFAULT_MAX_SPAN_WORDS, SpanScores, select_best_span
from .similarity import EmbeddingProvider, bertscore, word_overlap
from .taxonomy import Label, Thresholds, classify_prediction

TIMEOUT_ENV = "ACC_BACKEND_TIMEOUT_SECS"
DEFAULT_TIMEOUT_SECS = 30.0

WIRE_LABELS = {label.value for label in Label}


class BackendError(RuntimeError):
    """Backend failed: timeout, closed transport, or an error response."""


class BackendProtocolError(BackendError):
    """Backend answered, but not in the shape the protocol demands."""


def default_timeout() -> float:
    raw = os.environ.get(TIMEOUT_ENV)
    return float(raw) if raw else DEFAULT_TIMEOUT_SECS


class Transport(Protocol):
    def send_line(self, line: str) -> None: ...

    def recv_line(self, timeout: float) -> str: ...

    def close(self) -> None: ...


class ProcessTransport:
    """Line transport over a child process's standard streams."""

    def __init__(self, cmd: str | Sequence[str]):
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
        )
        self._buf = bytearray()

    def send_line(self, line: str) -> None:
        try:
            self.proc.stdin.write((line + "\n").encode("utf-8"))
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as e:
            raise BackendError(f"backend process closed its input: {e}") from e

    def recv_line(self, timeout: float) -> str:
        deadline = time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                line = self._buf[:nl].decode("utf-8")
                del self._buf[: nl + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BackendError(f"timeout after {timeout}s waiting for backend response")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise BackendError(f"timeout after {timeout}s waiting for backend response")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise BackendError("backend process closed its output stream")
            self._buf += chunk

    def close(self) -> None:
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class TcpTransport:
    """Line transport over a TCP connection; same wire format."""

    def __init__(self, host: str, port: int):
        self.sock = socket.create_connection((host, port))
        self._buf = bytearray()

    def send_line(self, line: str) -> None:
        try:
            self.sock.sendall((line + "\n").encode("utf-8"))
        except OSError as e:
            raise BackendError(f"backend connection closed: {e}") from e

    def recv_line(self, timeout: float) -> str:
        deadline = time.monotonic() + timeout
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                line = self._buf[:nl].decode("utf-8")
                del self._buf[: nl + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BackendError(f"timeout after {timeout}s waiting for backend response")
            self.sock.settimeout(remaining)
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                raise BackendError(f"timeout after {timeout}s waiting for backend response")
            except OSError as e:
                raise BackendError(f"backend connection failed: {e}") from e
            if not chunk:
                raise BackendError("backend closed the connection")
            self._buf += chunk

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


def backend_roundtrip(request: dict, transport: Transport, timeout: float | None = None) -> dict:
    """Write one request line, read one response line, check the id contract."""
    if timeout is None:
        timeout = default_timeout()
    transport.send_line(json.dumps(request, ensure_ascii=False))
    line = transport.recv_line(timeout)
    try:
        response = json.loads(line)
    except json.JSONDecodeError as e:
        raise BackendProtocolError(f"unparseable backend response: {line!r}") from e
    if not isinstance(response, dict):
        raise BackendProtocolError(f"backend response is not an object: {line!r}")
    if response.get("id") != request["id"]:
        raise BackendProtocolError(
            f"response id {response.get('id')!r} does not match request id {request['id']!r}"
        )
    error = response.get("error")
    if error is not None:
        raise BackendError(f"backend error: {error}")
    return response


class BackendClient:
    """One sequential request/response conversation with monotonic ids."""

    def __init__(self, transport: Transport, timeout: float | None = None):
        self.transport = transport
        self.timeout = timeout
        self._next_id = 0

    def request(self, op: str, **fields) -> dict:
        self._next_id += 1
        return backend_roundtrip(
            {"id": self._next_id, "op": op, **fields}, self.transport, self.timeout
        )

    def close(self) -> None:
        self.transport.close()


# ---------------------------------------------------------------------------
# Offline backends


def oracle_classify(
    pred: str,
    ex: Example,
    thresholds: Thresholds | None = None,
    provider: EmbeddingProvider | None = None,
) -> Label:
    """Perfect classifier: the taxonomy applied with the gold answers."""
    return classify_prediction(pred, ex.gold_texts, thresholds, provider).label


def oracle_correct(pred: str, ex: Example, provider: EmbeddingProvider | None = None) -> str:
    """Idealized corrector: snap to the best gold present verbatim in context.

    Among golds whose normalized words occur in the context, returns the one
    maximizing (WO with pred, then BS, then lexicographic normalized text);
    when no gold occurs in the context the prediction comes back unchanged.
    """
    in_context = [
        g.text for g in ex.golds if find_span_occurrences(g.text, list(ex.context_words))
    ]
    if not in_context:
        return pred
    return min(
        in_context,
        key=lambda g: (
            -word_overlap(pred, g),
            -bertscore(pred, g, provider),
            normalize_answer(g),
            g,
        ),
    )


class OracleClassifier:
    def __init__(self, thresholds: Thresholds | None = None, provider: EmbeddingProvider | None = None):
        self.thresholds = thresholds
        self.provider = provider

    def classify(self, ex: Example, prediction: str) -> Label:
        return oracle_classify(prediction, ex, self.thresholds, self.provider)


class OracleCorrector:
    def __init__(self, provider: EmbeddingProvider | None = None):
        self.provider = provider

    def correct(self, ex: Example, prediction: str) -> str:
        return oracle_correct(prediction, ex, self.provider)


class IdentityClassifier:
    """Labels everything correct, so nothing is dropped or corrected."""

    def classify(self, ex: Example, prediction: str) -> Label:
        return Label.CORRECT


class IdentityCorrector:
    def correct(self, ex: Example, prediction: str) -> str:
        return prediction


class FilePredictionsReader:
    """Reader backed by a predictions file; examples absent from it read empty."""

    def __init__(self, predictions: dict[str, list[str]]):
        self.predictions = predictions

    def read(self, ex: Example) -> list[str]:
        return list(self.predictions.get(ex.id, []))


# ---------------------------------------------------------------------------
# Wire-protocol role adapters


class WireReader:
    def __init__(self, client: BackendClient):
        self.client = client

    def read(self, ex: Example) -> list[str]:
        response = self.client.request("read", question=ex.question, context=ex.context_text)
        spans = response.get("spans")
        if not isinstance(spans, list):
            raise BackendProtocolError(f"read response without spans list: {response!r}")
        return [str(s) for s in spans]

    def close(self) -> None:
        self.client.close()


class WireClassifier:
    def __init__(self, client: BackendClient):
        self.client = client

    def classify(self, ex: Example, prediction: str) -> Label:
        response = self.client.request(
            "classify", question=ex.question, context=ex.context_text, prediction=prediction
        )
        label = response.get("label")
        if label not in WIRE_LABELS:
            raise BackendProtocolError(f"classify response with bad label: {response!r}")
        return Label(label)

    def close(self) -> None:
        self.client.close()


class WireCorrector:
    """Corrector adapter accepting either a span string or raw st/ed scores."""

    def __init__(self, client: BackendClient, max_span_words: int = DEFAULT_MAX_SPAN_WORDS):
        self.client = client
        self.max_span_words = max_span_words

    def correct(self, ex: Example, prediction: str) -> str:
        response = self.client.request(
            "correct", question=ex.question, context=ex.context_text, prediction=prediction
        )
        if "span" in response:
            return str(response["span"])
        if "st" in response and "ed" in response:
            st, ed = response["st"], response["ed"]
            if len(st) != len(ex.context_words) or len(ed) != len(ex.context_words):
                raise BackendProtocolError(
                    f"st/ed lengths {len(st)}/{len(ed)} do not cover the "
                    f"{len(ex.context_words)}-word context"
                )
            try:
                scores = SpanScores(tuple(st), tuple(ed))
            except (TypeError, ValueError) as e:
                raise BackendProtocolError(f"bad span scores: {e}") from e
            i, j = select_best_span(scores, self.max_span_words)
            return " ".join(ex.context_words[i : j + 1])
        raise BackendProtocolError(f"correct response without span or st/ed: {response!r}")

    def close(self) -> None:
        self.client.close()


class WireEmbedder:
    """EmbeddingProvider that forwards token lists over the wire protocol."""

    def __init__(self, client: BackendClient):
        self.client = client

    def embed(self, tokens: Sequence[str]) -> list[np.ndarray]:
        response = self.client.request("embed", tokens=list(tokens))
        vectors = response.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(tokens):
            got = len(vectors) if isinstance(vectors, list) else type(vectors).__name__
            raise BackendProtocolError(f"embed response with {got} vectors for {len(tokens)} tokens")
        out = [np.asarray(v, dtype=float) for v in vectors]
        if out and any(v.shape != out[0].shape for v in out):
            raise BackendProtocolError("embed response vectors have mixed dimensions")
        return out

    def close(self) -> None:
        self.client.close()
