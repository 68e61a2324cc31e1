import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acckit.norm import ARTICLES, find_span_occurrences, normalize_answer, word_tokenize


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("The London Studios", "london studios"),
        ("", ""),
        ("  Becky   Sloan! ", "becky sloan"),
        ("a.m.", "am"),
        ("The the THE", ""),
        ("don't", "dont"),
        ("Joseph Pelling", "joseph pelling"),
        ("an Answer, a Question; the End.", "answer question end"),
    ],
)
def test_normalize_answer(raw, expected):
    assert normalize_answer(raw) == expected


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("becky sloan", ["becky", "sloan"]),
        ("", []),
        ("joseph  pelling ", ["joseph", "pelling"]),
    ],
)
def test_word_tokenize(raw, expected):
    assert word_tokenize(raw) == expected


text_strategy = st.text(
    alphabet=string.ascii_letters + string.digits + string.punctuation + " \té中",
    max_size=40,
)


@given(text_strategy)
def test_normalize_idempotent(text):
    once = normalize_answer(text)
    assert normalize_answer(once) == once


@given(text_strategy)
def test_tokens_clean(text):
    tokens = word_tokenize(text)
    assert all(tokens), "no empty tokens"
    assert not any(t in ARTICLES for t in tokens)
    assert len(tokens) <= len(text.split())


def occurrences_oracle(span, context_words):
    target = word_tokenize(span)
    if not target:
        return []
    hits = []
    for i in range(len(context_words)):
        for j in range(i, len(context_words)):
            if [normalize_answer(w) for w in context_words[i : j + 1]] == target:
                hits.append((i, j))
    return hits


CONTEXT = "Becky Sloan and Joseph Pelling made it ; Becky Sloan did the art".split()


@pytest.mark.parametrize(
    "span,expected",
    [
        ("Sloan", [(1, 1), (9, 9)]),
        ("xyz", []),
        ("becky sloan", [(0, 1), (8, 9)]),
        ("the art", [(12, 12)]),  # article vanishes, matches the single word
        ("", []),
    ],
)
def test_find_span_occurrences(span, expected):
    assert find_span_occurrences(span, CONTEXT) == expected
    assert find_span_occurrences(span, CONTEXT) == occurrences_oracle(span, CONTEXT)


def test_occurrences_match_oracle_randomized():
    import random

    from conftest import random_words

    rng = random.Random(7)
    for _ in range(200):
        context = random_words(rng, max_len=12)
        span = " ".join(random_words(rng, max_len=3))
        got = find_span_occurrences(span, context)
        assert got == occurrences_oracle(span, context)
        assert all(i <= j for i, j in got)
        assert [i for i, _ in got] == sorted({i for i, _ in got})
