"""Canonical dataset loading and per-benchmark conversion."""

import json

import pytest

from damqa.datasets import SampleRecord, convert, load_canonical, write_canonical
from damqa.errors import DataError


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


GOOD_ROWS = [
    {"id": "a", "image": "a.png", "question": "q1?", "answers": ["x"],
     "dataset": "t"},
    {"id": "b", "image": "b.png", "question": "q2?", "answers": ["y", "z"],
     "question_type": "MCQ", "dataset": "t"},
    {"id": "c", "image": "c.png", "question": "q3?", "answers": ["w"],
     "dataset": "t"},
]


class TestLoadCanonical:
    def test_three_valid_lines(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, GOOD_ROWS)
        records = load_canonical(path)
        assert len(records) == 3
        assert records[1].question_type == "MCQ"
        assert records[1].answers == ("y", "z")

    def test_duplicate_id_names_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [GOOD_ROWS[0], dict(GOOD_ROWS[0])])
        with pytest.raises(DataError, match=":2"):
            load_canonical(path)

    def test_empty_answers_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [{"id": "a", "image": "a.png", "question": "q",
                            "answers": []}])
        with pytest.raises(DataError, match=":1"):
            load_canonical(path)

    def test_malformed_line_names_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"id": "a"}\nnot json\n', encoding="utf-8")
        with pytest.raises(DataError):
            load_canonical(path)

    def test_missing_images_reported_with_ids(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, GOOD_ROWS)
        (tmp_path / "a.png").write_bytes(b"x")
        with pytest.raises(DataError) as err:
            load_canonical(path, images_root=tmp_path)
        assert "b" in str(err.value) and "c" in str(err.value)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "d.jsonl"
        records = [SampleRecord(id="r1", image="i.png", question="q?",
                                answers=("a", "b"), question_type="MCQ",
                                answer_kind=None, dataset="x")]
        write_canonical(records, path)
        assert load_canonical(path) == records


class TestConvert:
    def test_docvqa(self, tmp_path):
        src = tmp_path / "docvqa.json"
        src.write_text(json.dumps({"data": [
            {"questionId": 1, "question": "total?", "image": "documents/d1.png",
             "answers": ["12", "12.0"]},
            {"questionId": 2, "question": "date?", "image": "documents/d2.png",
             "answers": ["May 5"]},
        ]}))
        out = tmp_path / "out.jsonl"
        assert convert("docvqa", src, out) == 2
        records = load_canonical(out)
        assert records[0].id == "1"
        assert records[0].image == "d1.png"
        assert records[0].answers == ("12", "12.0")
        assert records[0].dataset == "docvqa"

    def test_textvqa(self, tmp_path):
        src = tmp_path / "textvqa.json"
        src.write_text(json.dumps({"data": [
            {"question_id": 10, "question": "brand?", "image_id": "abc123",
             "answers": ["acme"] * 10},
        ]}))
        out = tmp_path / "out.jsonl"
        assert convert("textvqa", src, out) == 1
        record = load_canonical(out)[0]
        assert record.image == "abc123.jpg"
        assert len(record.answers) == 10

    def test_chartqa(self, tmp_path):
        src = tmp_path / "chartqa.json"
        src.write_text(json.dumps([
            {"imgname": "c1.png", "query": "max value?", "label": "37.5"},
        ]))
        out = tmp_path / "out.jsonl"
        assert convert("chartqa", src, out) == 1
        assert load_canonical(out)[0].answers == ("37.5",)

    def test_chartqapro_drops_conversational(self, tmp_path):
        src = tmp_path / "pro.json"
        src.write_text(json.dumps([
            {"image": "p1.png", "question": "is it rising?", "answer": ["Yes"],
             "question_type": "Fact Checking"},
            {"image": "p2.png", "question": ["follow-up?"], "answer": ["No"],
             "question_type": "Conversational"},
            {"image": "p3.png", "question": "which year?", "answer": ["2020"],
             "question_type": "Factoid"},
            {"image": "p4.png", "question": "list them", "answer": ["a", "b"],
             "question_type": "Factoid"},
        ]))
        out = tmp_path / "out.jsonl"
        assert convert("chartqapro", src, out) == 3
        records = load_canonical(out)
        assert all(r.question_type != "Conversational" for r in records)
        assert records[1].answer_kind == "year"
        assert records[2].answer_kind == "list"

    def test_vqav2_with_subset(self, tmp_path):
        ann = tmp_path / "ann.json"
        ann.write_text(json.dumps({"annotations": [
            {"question_id": 100, "image_id": 42,
             "answers": [{"answer": f"a{i}"} for i in range(10)]},
            {"question_id": 101, "image_id": 43,
             "answers": [{"answer": "b"}] * 10},
        ]}))
        qs = tmp_path / "qs.json"
        qs.write_text(json.dumps({"questions": [
            {"question_id": 100, "question": "what color?"},
            {"question_id": 101, "question": "how many?"},
        ]}))
        subset = tmp_path / "ids.txt"
        subset.write_text("100\n")
        out = tmp_path / "out.jsonl"
        count = convert("vqav2", ann, out, questions_path=qs,
                        subset_ids_path=subset)
        assert count == 1
        record = load_canonical(out)[0]
        assert record.id == "100"
        assert record.image == "COCO_val2014_000000000042.jpg"
        assert len(record.answers) == 10

    def test_vqav2_requires_questions(self, tmp_path):
        ann = tmp_path / "ann.json"
        ann.write_text(json.dumps({"annotations": []}))
        with pytest.raises(DataError):
            convert("vqav2", ann, tmp_path / "out.jsonl")

    def test_unknown_format(self, tmp_path):
        src = tmp_path / "x.json"
        src.write_text("{}")
        with pytest.raises(ValueError):
            convert("okvqa", src, tmp_path / "out.jsonl")

    def test_empty_input_warns_and_writes_empty(self, tmp_path, caplog):
        src = tmp_path / "empty.json"
        src.write_text(json.dumps({"data": []}))
        out = tmp_path / "out.jsonl"
        with caplog.at_level("WARNING"):
            assert convert("docvqa", src, out) == 0
        assert out.read_text() == ""
        assert "no records" in caplog.text

    def test_schema_mismatch_skips_with_log(self, tmp_path, caplog):
        src = tmp_path / "docvqa.json"
        src.write_text(json.dumps({"data": [
            {"questionId": 1, "question": "ok?", "image": "i.png",
             "answers": ["a"]},
            {"questionId": 2, "image": "j.png", "answers": ["b"]},  # no question
        ]}))
        out = tmp_path / "out.jsonl"
        with caplog.at_level("WARNING"):
            assert convert("docvqa", src, out) == 1
        assert "skipping" in caplog.text

    def test_converted_records_satisfy_invariants_and_round_trip(self, tmp_path):
        src = tmp_path / "docvqa.json"
        rows = [{"questionId": i, "question": f"q{i}?", "image": f"im{i}.png",
                 "answers": [f"a{i}"]} for i in range(5)]
        src.write_text(json.dumps({"data": rows}))
        out = tmp_path / "out.jsonl"
        count = convert("docvqa", src, out)
        records = load_canonical(out)
        assert len(records) == count == 5
        for i, record in enumerate(records):
            assert record.id == str(i)
            assert record.question == f"q{i}?"
            assert record.answers == (f"a{i}",)
