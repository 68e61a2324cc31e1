import random
from fractions import Fraction

import pytest

from acckit.metrics import MatchCounts, aggregate_micro, em_counts, pm_counts, score_dataset
from acckit.norm import normalize_answer

from conftest import random_words

# ---------------------------------------------------------------------------
# Reference scorer: set intersection for EM, enumerated word-LCS for PM,
# exact rational arithmetic for the micro sums.


def ref_dedup(texts):
    out = []
    for t in texts:
        n = normalize_answer(t)
        if n not in out:
            out.append(n)
    return out


def ref_lcs(a, b):
    best = 0
    for i in range(len(a)):
        for j in range(i + 1, len(a) + 1):
            sub = a[i:j]
            if any(b[k : k + len(sub)] == sub for k in range(len(b) - len(sub) + 1)):
                best = max(best, len(sub))
    return best


def ref_em(preds, golds):
    p, g = set(ref_dedup(preds)), set(ref_dedup(golds))
    inter = len(p & g)
    return (inter, inter, len(p), len(g))


def ref_pm(preds, golds):
    p = [x.split() for x in ref_dedup(preds)]
    g = [x.split() for x in ref_dedup(golds)]
    pc = sum(
        Fraction(max(ref_lcs(pw, gw) for gw in g), len(pw)) for pw in p if pw and g
    )
    gc = sum(
        Fraction(max(ref_lcs(pw, gw) for pw in p), len(gw)) for gw in g if gw and p
    )
    return (pc, gc, len(p), len(g))


def ref_micro(count_tuples):
    pc = gc = Fraction(0)
    np_ = ng = 0
    for c_pc, c_gc, c_np, c_ng in count_tuples:
        if c_np == 0 and c_ng == 0:
            pc, gc, np_, ng = pc + 1, gc + 1, np_ + 1, ng + 1
        else:
            pc, gc, np_, ng = pc + c_pc, gc + c_gc, np_ + c_np, ng + c_ng
    p = float(pc / np_) if np_ else 0.0
    r = float(gc / ng) if ng else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


# ---------------------------------------------------------------------------


def test_em_examples():
    c = em_counts(["Becky Sloan", "DHMIS"], {"Becky Sloan", "Joseph Pelling"})
    assert (c.pred_credit, c.n_preds, c.n_golds) == (1, 2, 2)
    prf = c.prf()
    assert prf.precision == 0.5 and prf.recall == 0.5

    c = em_counts(["a b", "c d"], {"a b", "c d"})
    assert c.prf().f1 == 1.0

    c = em_counts(["the London Studios"], {"London Studios"})
    assert c.pred_credit == 1


def test_pm_examples():
    c = pm_counts(["Becky"], {"Becky Sloan"})
    prf = c.prf()
    assert prf.precision == 1.0
    assert prf.recall == 0.5

    c = pm_counts(["Becky Sloan", "Joseph Pelling"], {"Becky Sloan", "Joseph Pelling"})
    assert c.prf() == c.prf()
    assert c.prf().f1 == 1.0

    c = pm_counts(["xyz"], {"Becky Sloan"})
    assert c.prf().precision == 0.0 and c.prf().recall == 0.0


def test_micro_aggregation_example():
    total = aggregate_micro(
        [MatchCounts(1, 1, 2, 2), MatchCounts(1, 1, 1, 2)]
    )
    assert total.precision == pytest.approx(2 / 3)
    assert total.recall == pytest.approx(0.5)
    assert total.f1 == pytest.approx(4 / 7)


def test_micro_unanswerable_conventions():
    # no golds, no predictions: full credit
    assert aggregate_micro([MatchCounts(0, 0, 0, 0)]).f1 == 1.0
    # no golds but predictions: precision penalty only
    prf = aggregate_micro([MatchCounts(0, 0, 2, 0)])
    assert prf.precision == 0.0 and prf.recall == 0.0
    # empty dataset
    assert aggregate_micro([]).f1 == 0.0


def test_singleton_aggregation_matches_question_level():
    c = em_counts(["x y", "z"], {"x y"})
    assert aggregate_micro([c]) == c.prf()


def test_em_iff_set_equality():
    rng = random.Random(31)
    for _ in range(200):
        preds = [" ".join(random_words(rng, 3)) for _ in range(rng.randint(0, 4))]
        golds = [" ".join(random_words(rng, 3)) for _ in range(rng.randint(0, 4))]
        prf = em_counts(preds, golds).prf()
        equal_sets = set(ref_dedup(preds)) == set(ref_dedup(golds)) and len(ref_dedup(preds)) > 0
        assert (prf.precision == prf.recall == prf.f1 == 1.0) == equal_sets


def test_pm_dominates_em_pointwise():
    rng = random.Random(32)
    for _ in range(300):
        preds = [" ".join(random_words(rng, 4)) for _ in range(rng.randint(0, 4))]
        golds = [" ".join(random_words(rng, 4)) for _ in range(rng.randint(0, 4))]
        em, pm = em_counts(preds, golds), pm_counts(preds, golds)
        assert pm.pred_credit >= em.pred_credit - 1e-12
        assert pm.gold_credit >= em.gold_credit - 1e-12
        assert 0 <= pm.pred_credit <= pm.n_preds + 1e-12
        assert 0 <= pm.gold_credit <= pm.n_golds + 1e-12


def test_wrong_prediction_hurts_em_precision_only():
    preds = ["alpha beta"]
    golds = ["alpha beta", "gamma"]
    base = em_counts(preds, golds)
    worse = em_counts(preds + ["zzz"], golds)
    assert worse.prf().precision < base.prf().precision
    assert worse.prf().recall == base.prf().recall


def test_against_reference_scorer_randomized():
    rng = random.Random(33)
    questions = []
    for _ in range(200):
        preds = [" ".join(random_words(rng, 4, min_len=0)) for _ in range(rng.randint(0, 4))]
        golds = [" ".join(random_words(rng, 4)) for _ in range(rng.randint(0, 3))]
        questions.append((preds, golds))

    em_ref = ref_micro([ref_em(p, g) for p, g in questions])
    pm_ref = ref_micro([ref_pm(p, g) for p, g in questions])
    got = score_dataset([p for p, _ in questions], [g for _, g in questions])

    assert (got["em"].precision, got["em"].recall, got["em"].f1) == em_ref
    for a, b in zip((got["pm"].precision, got["pm"].recall, got["pm"].f1), pm_ref):
        assert a == pytest.approx(b, abs=1e-9)
