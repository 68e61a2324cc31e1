import random

import pytest

from acckit.dataio import Example, Gold


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[{'PASS' if report.passed else 'FAIL'}] acceptance: {name}")

VOCAB = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lam", "mu", "nu", "xi", "omicron", "pi", "rho",
    "sigma", "tau", "upsilon",
]


@pytest.fixture
def figure1_example() -> Example:
    """The running example: two gold creators, three typical predictions."""
    context = (
        "Don't Hug Me I'm Scared is a British comedy web series "
        "created by Becky Sloan and Joseph Pelling in 2011"
    ).split()
    return Example(
        id="fig1",
        question="Who made Don't Hug Me I'm Scared?",
        context_words=tuple(context),
        golds=(
            Gold("Becky Sloan", (context.index("Becky"), context.index("Sloan"))),
            Gold("Joseph Pelling", (context.index("Joseph"), context.index("Pelling"))),
        ),
    )


@pytest.fixture
def figure1_predictions() -> list[str]:
    return ["Joseph Pelling", "Sloan", "DHMIS"]


def random_words(rng: random.Random, max_len: int = 4, min_len: int = 1) -> list[str]:
    return [rng.choice(VOCAB) for _ in range(rng.randint(min_len, max_len))]
