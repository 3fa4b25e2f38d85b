"""Canonical dataset records and per-benchmark converters.

Canonical format: one JSON object per line with the fields
{"id", "image", "question", "answers", "question_type", "answer_kind",
"dataset"}. Benchmark-specific quirks live only in the converters; the
rest of the harness sees a single record shape.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

from damqa.errors import DataError
from damqa.metrics import is_year, parse_numeric

logger = logging.getLogger(__name__)

SOURCE_FORMATS = ("docvqa", "textvqa", "chartqa", "chartqapro",
                  "infographicvqa", "vqav2")


@dataclass(frozen=True)
class SampleRecord:
    """One benchmark item in canonical form."""

    id: str
    image: str
    question: str
    answers: tuple[str, ...]
    question_type: Optional[str] = None
    answer_kind: Optional[str] = None
    dataset: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if not self.question:
            raise ValueError("record question must be non-empty")
        if not self.answers or any(not isinstance(a, str) for a in self.answers):
            raise ValueError("record needs at least one string answer")

    def to_json(self) -> str:
        payload = asdict(self)
        payload["answers"] = list(self.answers)
        return json.dumps(payload, ensure_ascii=False, sort_keys=True)


def load_canonical(path: Union[str, Path],
                   images_root: Optional[Union[str, Path]] = None) -> list[SampleRecord]:
    """Load and validate a canonical JSONL file.

    Duplicate ids and malformed lines fail with the offending line number.
    When ``images_root`` is given, records whose image file is missing are
    rejected together, listed by id.
    """
    records: list[SampleRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                record = SampleRecord(
                    id=str(raw["id"]),
                    image=raw["image"],
                    question=raw["question"],
                    answers=tuple(raw["answers"]),
                    question_type=raw.get("question_type"),
                    answer_kind=raw.get("answer_kind"),
                    dataset=raw.get("dataset", ""),
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if record.id in seen:
                raise DataError(f"{path}:{lineno}: duplicate id {record.id!r}")
            seen.add(record.id)
            records.append(record)

    if images_root is not None:
        root = Path(images_root)
        missing = [r.id for r in records if not (root / r.image).is_file()]
        if missing:
            raise DataError(f"{path}: missing image files for ids: "
                            f"{', '.join(missing[:20])}"
                            + (" ..." if len(missing) > 20 else ""))
    return records


def write_canonical(records: list[SampleRecord], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")


def _as_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [str(value)]


def _convert_docvqa(raw: dict, dataset: str) -> list[SampleRecord]:
    # Official schema: {"data": [{"questionId", "question", "image", "answers"}]}
    records = []
    for item in raw.get("data", []):
        try:
            records.append(SampleRecord(
                id=str(item["questionId"]),
                image=str(item["image"]).removeprefix("documents/"),
                question=item["question"],
                answers=tuple(_as_list(item.get("answers", []))),
                dataset=dataset,
            ))
        except (KeyError, ValueError) as exc:
            logger.warning("%s: skipping record %r: %s", dataset, item.get("questionId"), exc)
    return records


def _convert_textvqa(raw: dict) -> list[SampleRecord]:
    # Official schema: {"data": [{"question_id", "question", "image_id", "answers"}]}
    records = []
    for item in raw.get("data", []):
        try:
            records.append(SampleRecord(
                id=str(item["question_id"]),
                image=f"{item['image_id']}.jpg",
                question=item["question"],
                answers=tuple(_as_list(item.get("answers", []))),
                dataset="textvqa",
            ))
        except (KeyError, ValueError) as exc:
            logger.warning("textvqa: skipping record %r: %s", item.get("question_id"), exc)
    return records


def _convert_chartqa(raw: list) -> list[SampleRecord]:
    # Official schema: [{"imgname", "query", "label"}]
    records = []
    for i, item in enumerate(raw):
        try:
            records.append(SampleRecord(
                id=f"chartqa-{i}",
                image=str(item["imgname"]),
                question=item["query"],
                answers=(str(item["label"]),),
                dataset="chartqa",
            ))
        except (KeyError, ValueError) as exc:
            logger.warning("chartqa: skipping record %d: %s", i, exc)
    return records


def _infer_answer_kind(answers: tuple[str, ...]) -> Optional[str]:
    if len(answers) > 1:
        return "list"
    if is_year(answers[0]):
        return "year"
    if parse_numeric(answers[0]) is not None:
        return "numeric"
    return None


def _convert_chartqapro(raw: list) -> list[SampleRecord]:
    # Released schema: [{"image", "question", "answer", "question_type", ...}];
    # conversational items are excluded from evaluation.
    records = []
    for i, item in enumerate(raw):
        qtype = str(item.get("question_type", "") or "")
        if qtype.lower() == "conversational":
            continue
        question = item.get("question")
        if isinstance(question, list):
            question = question[0] if question else None
        answers = tuple(_as_list(item.get("answer", [])))
        try:
            records.append(SampleRecord(
                id=str(item.get("id", f"chartqapro-{i}")),
                image=str(item["image"]),
                question=question,
                answers=answers,
                question_type=qtype or None,
                answer_kind=item.get("answer_kind") or
                            (_infer_answer_kind(answers) if answers else None),
                dataset="chartqapro",
            ))
        except (KeyError, ValueError, TypeError) as exc:
            logger.warning("chartqapro: skipping record %d: %s", i, exc)
    return records


def _convert_vqav2(raw: dict, questions: Optional[dict],
                   subset_ids: Optional[set[str]]) -> list[SampleRecord]:
    # Official schema: annotations file {"annotations": [{"question_id",
    # "image_id", "answers": [{"answer": ...} x10]}]} plus a questions file
    # {"questions": [{"question_id", "question"}]}.
    if questions is None:
        raise DataError("vqav2 conversion needs the questions file (--questions)")
    question_text = {str(q["question_id"]): q["question"]
                     for q in questions.get("questions", [])}
    records = []
    for item in raw.get("annotations", []):
        qid = str(item.get("question_id"))
        if subset_ids is not None and qid not in subset_ids:
            continue
        try:
            records.append(SampleRecord(
                id=qid,
                image=f"COCO_val2014_{int(item['image_id']):012d}.jpg",
                question=question_text[qid],
                answers=tuple(a["answer"] for a in item["answers"]),
                question_type=item.get("question_type"),
                dataset="vqav2",
            ))
        except (KeyError, ValueError, TypeError) as exc:
            logger.warning("vqav2: skipping record %r: %s", qid, exc)
    return records


def convert(source_format: str, in_path: Union[str, Path],
            out_path: Union[str, Path],
            questions_path: Optional[Union[str, Path]] = None,
            subset_ids_path: Optional[Union[str, Path]] = None) -> int:
    """Convert a benchmark annotation file to canonical JSONL.

    Returns the number of records written. ``questions_path`` is required
    for vqav2; ``subset_ids_path`` (one question id per line) restricts
    vqav2 to a named subset such as rest-val.
    """
    if source_format not in SOURCE_FORMATS:
        raise ValueError(f"unknown source format {source_format!r}; "
                         f"expected one of {', '.join(SOURCE_FORMATS)}")
    with open(in_path, encoding="utf-8") as fh:
        raw = json.load(fh)

    if source_format == "docvqa":
        records = _convert_docvqa(raw, "docvqa")
    elif source_format == "infographicvqa":
        records = _convert_docvqa(raw, "infographicvqa")
    elif source_format == "textvqa":
        records = _convert_textvqa(raw)
    elif source_format == "chartqa":
        records = _convert_chartqa(raw)
    elif source_format == "chartqapro":
        records = _convert_chartqapro(raw)
    else:
        questions = None
        if questions_path is not None:
            with open(questions_path, encoding="utf-8") as fh:
                questions = json.load(fh)
        subset_ids = None
        if subset_ids_path is not None:
            with open(subset_ids_path, encoding="utf-8") as fh:
                subset_ids = {line.strip() for line in fh if line.strip()}
        records = _convert_vqav2(raw, questions, subset_ids)

    if not records:
        logger.warning("%s: no records converted from %s", source_format, in_path)
    write_canonical(records, out_path)
    return len(records)
