"""Role servers and the command-line entry point.

Model selection by identifier:
  hash / hash:DIM  deterministic built-ins, no weights needed
  llm:MODEL        prompted chat model on an OpenAI-compatible endpoint
  anything else    a transformer checkpoint path or name
"""

from __future__ import annotations

import argparse
import sys

from .builtin import HashEncoder, HeuristicClassifier, HeuristicCorrector, HeuristicReader
from .config import AdapterConfig
from .llm import DemoPool, LlmRole, OpenAiChatClient, load_prompt
from .protocol import serve_forever


class EmbedderHandler:
    ops = ("embed",)

    def __init__(self, encoder):
        self.encoder = encoder

    def handle(self, request: dict) -> dict:
        tokens = request.get("tokens")
        if not isinstance(tokens, list):
            raise ValueError("embed request needs a tokens list")
        return {"vectors": self.encoder.embed([str(t) for t in tokens])}


class ClassifierHandler:
    ops = ("classify",)

    def __init__(self, model):
        self.model = model

    def handle(self, request: dict) -> dict:
        label = self.model.classify(
            str(request.get("question", "")),
            str(request.get("context", "")),
            str(request["prediction"]),
        )
        if label not in ("correct", "partially", "wrong"):
            raise ValueError(f"model produced a label outside the vocabulary: {label!r}")
        return {"label": label}


class CorrectorHandler:
    """Span-string correctors return {"span"}; pointer models return raw
    {"st", "ed"} score arrays and leave the argmax to the client."""

    ops = ("correct",)

    def __init__(self, model):
        self.model = model

    def handle(self, request: dict) -> dict:
        question = str(request.get("question", ""))
        context = str(request.get("context", ""))
        prediction = str(request["prediction"])
        if hasattr(self.model, "scores"):
            st, ed = self.model.scores(question, context, prediction)
            return {"st": st, "ed": ed}
        return {"span": self.model.correct(question, context, prediction)}


class ReaderHandler:
    ops = ("read",)

    def __init__(self, model):
        self.model = model

    def handle(self, request: dict) -> dict:
        spans = self.model.read(str(request.get("question", "")), str(request.get("context", "")))
        return {"spans": [str(s) for s in spans]}


def build_handler(config: AdapterConfig, completer=None):
    """Construct the role handler; raises on a bad config or unloadable model."""
    model_id = config.model
    if model_id == "hash" or model_id.startswith("hash:"):
        dim = int(model_id.split(":", 1)[1]) if ":" in model_id else 128
        if config.role == "embedder":
            return EmbedderHandler(HashEncoder(dim=dim))
        if config.role == "classifier":
            return ClassifierHandler(HeuristicClassifier())
        if config.role == "corrector":
            return CorrectorHandler(HeuristicCorrector())
        return ReaderHandler(HeuristicReader())

    if model_id.startswith("llm:"):
        if config.role == "embedder":
            raise ValueError("the embedder role needs a checkpoint, not an LLM")
        if completer is None:
            completer = OpenAiChatClient(
                config.llm_base_url,
                model_id.split(":", 1)[1],
                config.llm_api_key_env,
                config.llm_timeout,
            )
        demos = DemoPool(config.demos_path, config.use_bm25) if config.demos_path else None
        role = LlmRole(
            config.role,
            completer,
            load_prompt(config.prompt_path, config.role),
            demos,
            config.n_demos,
        )
        if config.role == "classifier":
            return ClassifierHandler(role)
        if config.role == "corrector":
            return CorrectorHandler(role)
        return ReaderHandler(role)

    # transformer checkpoint
    from . import hf_backends

    if config.role == "embedder":
        return EmbedderHandler(hf_backends.HfEncoder(model_id, config.device, config.max_length))
    if config.role == "classifier":
        return ClassifierHandler(hf_backends.HfClassifier(model_id, config.device, config.max_length))
    if config.role == "corrector":
        return CorrectorHandler(
            hf_backends.HfPointerCorrector(model_id, config.device, config.max_length)
        )
    raise ValueError("the reader role is served by hash or llm models only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acc-adapter", description=__doc__)
    parser.add_argument("--role", required=True, choices=["reader", "classifier", "corrector", "embedder"])
    parser.add_argument("--model", default="hash")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-length", type=int, default=512)
    parser.add_argument("--prompt", default=None, help="override the shipped prompt template")
    parser.add_argument("--demos", default=None, help="few-shot demo pool (newline-delimited records)")
    parser.add_argument("--n-demos", type=int, default=3)
    parser.add_argument("--bm25", action="store_true", help="rank demos by BM25 over the question")
    parser.add_argument("--llm-base-url", default="https://api.openai.com/v1")
    parser.add_argument("--llm-api-key-env", default="OPENAI_API_KEY")
    parser.add_argument("--llm-timeout", type=float, default=60.0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(
            role=args.role,
            model=args.model,
            device=args.device,
            max_length=args.max_length,
            prompt_path=args.prompt,
            demos_path=args.demos,
            n_demos=args.n_demos,
            use_bm25=args.bm25,
            llm_base_url=args.llm_base_url,
            llm_api_key_env=args.llm_api_key_env,
            llm_timeout=args.llm_timeout,
        )
        handler = build_handler(config)
    except Exception as e:  # noqa: BLE001 - a server that cannot start must say why
        print(f"acc-adapter: cannot start: {e}", file=sys.stderr)
        return 1
    serve_forever(handler)
    return 0


if __name__ == "__main__":
    sys.exit(main())
