import json
import random

import pytest

from acckit.dataio import (
    DatasetError,
    DatasetFile,
    Example,
    Gold,
    decode_bio,
    encode_bio,
    import_bio,
    read_dataset,
    read_predictions,
    validate_dataset,
    write_dataset,
)


def test_decode_bio_examples():
    assert decode_bio(["O", "B", "I", "O"]) == ([(1, 2)], 0)
    assert decode_bio(["O", "O", "O"]) == ([], 0)
    assert decode_bio(["B", "O", "B"]) == ([(0, 0), (2, 2)], 0)
    assert decode_bio(["B", "B", "I"]) == ([(0, 0), (1, 2)], 0)
    assert decode_bio(["B", "I", "I"]) == ([(0, 2)], 0)


def test_decode_bio_orphan_repair():
    spans, repairs = decode_bio(["O", "I", "I", "O"])
    assert spans == [(1, 2)]
    assert repairs == 1


def test_decode_bio_unknown_tag():
    with pytest.raises(DatasetError, match="unknown BIO tag"):
        decode_bio(["B", "X"], where="somefile:3")


def _bio_line(qid, question, context, tags):
    return json.dumps({"id": qid, "question": question, "context": context, "tags": tags})


def test_import_bio(tmp_path):
    path = tmp_path / "bio.ndjson"
    path.write_text(
        _bio_line("q1", "who?", ["x", "Becky", "Sloan", "y"], ["O", "B", "I", "O"])
        + "\n"
        + _bio_line("q2", ["what", "else", "?"], ["a", "b", "c"], ["O", "O", "O"])
        + "\n",
        encoding="utf-8",
    )
    ds, repairs = import_bio(path)
    assert repairs == 0
    assert ds.examples[0].golds == (Gold("Becky Sloan", (1, 2)),)
    assert ds.examples[1].golds == ()
    assert ds.examples[1].question == "what else ?"


def test_import_bio_length_mismatch(tmp_path):
    path = tmp_path / "bio.ndjson"
    path.write_text(_bio_line("q1", "who?", ["x", "y"], ["O"]) + "\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="1 tags for 2"):
        import_bio(path)


def random_bio_example(rng, qid):
    n = rng.randint(1, 12)
    context = [rng.choice("abcdefg") + str(i) for i in range(n)]
    tags = []
    state = "O"
    for _ in range(n):
        if state == "O":
            state = rng.choice(["O", "O", "B"])
        else:
            state = rng.choice(["I", "O", "B"])
        tags.append(state)
    return {"id": qid, "question": "q", "context": context, "tags": tags}


def test_bio_roundtrip_randomized(tmp_path):
    rng = random.Random(41)
    for trial in range(100):
        recs = [random_bio_example(rng, f"q{i}") for i in range(rng.randint(1, 5))]
        path = tmp_path / f"bio{trial}.ndjson"
        path.write_text("".join(json.dumps(r) + "\n" for r in recs), encoding="utf-8")
        ds, repairs = import_bio(path)
        assert repairs == 0
        for rec, ex in zip(recs, ds.examples):
            assert encode_bio(ex) == rec["tags"]


def test_canonical_roundtrip(tmp_path, figure1_example):
    ds = DatasetFile([figure1_example], name="fig1", alpha=0.25, beta=0.6)
    path = tmp_path / "data.ndjson"
    write_dataset(ds, path)
    again = read_dataset(path)
    assert again.examples == ds.examples
    assert (again.name, again.alpha, again.beta) == ("fig1", 0.25, 0.6)
    write_dataset(again, tmp_path / "data2.ndjson")
    assert (tmp_path / "data2.ndjson").read_bytes() == path.read_bytes()


def test_read_dataset_requires_header(tmp_path):
    path = tmp_path / "bad.ndjson"
    path.write_text('{"id": "q1"}\n', encoding="utf-8")
    with pytest.raises(DatasetError, match="acc_format"):
        read_dataset(path)


def test_validate_dataset_stats():
    examples = [
        Example("a", "q one", ("x", "y", "z", "w"), (Gold("x", (0, 0)), Gold("z", (2, 2)))),
        Example("b", "q two", ("x", "y"), (Gold("y", (1, 1)),)),
        Example("c", "q three", ("x", "y"), ()),
    ]
    diag = validate_dataset(DatasetFile(examples))
    assert diag.ok
    assert diag.answer_counts == {"multi": 1, "single": 1, "none": 1}
    assert diag.answer_proportions["multi"] == pytest.approx(1 / 3)
    assert diag.avg_answer_number == pytest.approx(1.0)
    assert diag.avg_context_length == pytest.approx(8 / 3)
    assert diag.avg_question_length == pytest.approx(2.0)


def test_validate_dataset_problems():
    examples = [
        Example("a", "q", ("x", "y"), (Gold("zzz", (0, 1)),)),
        Example("a", "q", (), ()),
    ]
    diag = validate_dataset(DatasetFile(examples))
    assert diag.duplicate_ids == ["a"]
    assert diag.empty_contexts == ["a"]
    assert len(diag.bad_offsets) == 1 and "zzz" in diag.bad_offsets[0]
    assert not diag.ok


def test_read_predictions(tmp_path):
    path = tmp_path / "preds.ndjson"
    path.write_text(
        '{"id": "q1", "predictions": ["a", "b"]}\n{"id": "q2", "predictions": []}\n',
        encoding="utf-8",
    )
    assert read_predictions(path) == {"q1": ["a", "b"], "q2": []}
    bad = tmp_path / "bad.ndjson"
    bad.write_text("not json\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_predictions(bad)
