import shlex
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def adapter_cmd(*args) -> str:
    return " ".join(
        [shlex.quote(sys.executable), "-m", "acc_adapter.server"] + [shlex.quote(str(a)) for a in args]
    )


@pytest.fixture(scope="session")
def tiny_encoder_dir(tmp_path_factory) -> Path:
    """A small transformer checkpoint built locally (no hub access in CI)."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    out = tmp_path_factory.mktemp("tiny-encoder")
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + [chr(c) for c in range(ord("a"), ord("z") + 1)]
        + [f"##{chr(c)}" for c in range(ord("a"), ord("z") + 1)]
        + [str(i) for i in range(10)]
        + ["becky", "sloan", "joseph", "pelling", "the", "who", "made", "it"]
    )
    (out / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(out / "vocab.txt"))
    torch.manual_seed(7)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    BertModel(config).save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def tiny_classifier_dir(tmp_path_factory, tiny_encoder_dir) -> Path:
    import torch
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast

    out = tmp_path_factory.mktemp("tiny-classifier")
    tokenizer = BertTokenizerFast(vocab_file=str(tiny_encoder_dir / "vocab.txt"))
    torch.manual_seed(8)
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        num_labels=3,
        id2label={0: "wrong", 1: "partially", 2: "correct"},
        label2id={"wrong": 0, "partially": 1, "correct": 2},
    )
    BertForSequenceClassification(config).save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def tiny_qa_dir(tmp_path_factory, tiny_encoder_dir) -> Path:
    import torch
    from transformers import BertConfig, BertForQuestionAnswering, BertTokenizerFast

    out = tmp_path_factory.mktemp("tiny-qa")
    tokenizer = BertTokenizerFast(vocab_file=str(tiny_encoder_dir / "vocab.txt"))
    torch.manual_seed(9)
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    BertForQuestionAnswering(config).save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out
