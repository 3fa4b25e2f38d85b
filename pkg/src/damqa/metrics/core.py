"""Benchmark metric suite: ANLS, relaxed accuracy, and the VQA score.

Numeric parsing and the year heuristic are deliberately frozen:

* ``parse_numeric`` strips thousands separators (","), a single leading
  currency symbol ($, €, £, ¥), and a single trailing "%", then accepts a
  plain signed decimal. No exponents, no unit suffixes.
* ``is_year`` accepts exactly four digits forming an integer in
  [1000, 2999], with no separators.
* Relative tolerance against a ground truth of zero is undefined, so a
  zero ground truth requires an exact zero prediction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from damqa.metrics.editdist import levenshtein
from damqa.metrics.vqa_norm import vqa_normalize

__all__ = [
    "GroundTruth",
    "MetricScore",
    "levenshtein",
    "anls_similarity",
    "anls_score",
    "parse_numeric",
    "is_year",
    "relaxed_accuracy_chartqa",
    "relaxed_accuracy_pro",
    "vqa_normalize",
    "vqa_score",
    "aggregate",
]

MCQ = "MCQ"
FACT_CHECKING = "FactChecking"

_CURRENCY = "$€£¥"
_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)")
_YEAR_RE = re.compile(r"[12]\d{3}")
_QTYPE_STRIP_RE = re.compile(r"[\s_-]+")


def _canonical_question_type(question_type: Optional[str]) -> Optional[str]:
    """Fold tag spelling variants ("Fact Checking", "fact-checking", ...)."""
    if question_type is None:
        return None
    return _QTYPE_STRIP_RE.sub("", question_type).lower()


@dataclass(frozen=True)
class GroundTruth:
    """Reference answers for one question.

    ``answers`` holds the acceptable alternatives, except when
    ``answer_kind`` is "list": then it holds the ordered items of a single
    list-valued answer.
    """

    answers: tuple[str, ...]
    question_type: Optional[str] = None
    answer_kind: Optional[str] = None

    def __post_init__(self):
        if not self.answers:
            raise ValueError("ground truth needs at least one answer")


@dataclass(frozen=True)
class MetricScore:
    """A per-question metric value in [0, 1]."""

    value: float
    metric_name: str

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"metric value {self.value} outside [0, 1]")


def anls_similarity(pred: str, gt: str, tau: float = 0.5,
                    fold_case: bool = True) -> float:
    """1 - normalized Levenshtein distance, cut to 0 at threshold ``tau``.

    Inputs are whitespace-trimmed and (by default) lowercased before the
    edit distance; the distance is normalized by the longer length, and a
    pair of empty strings counts as identical.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must be in (0, 1]")
    a, b = pred.strip(), gt.strip()
    if fold_case:
        a, b = a.lower(), b.lower()
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    nl = levenshtein(a, b) / longest
    return 1.0 - nl if nl < tau else 0.0


def anls_score(pred: str, gts: Sequence[str], tau: float = 0.5,
               fold_case: bool = True) -> float:
    """Maximum ANLS similarity of ``pred`` across all ground truths."""
    if not gts:
        raise ValueError("anls_score needs at least one ground truth")
    return max(anls_similarity(pred, gt, tau, fold_case) for gt in gts)


def parse_numeric(s: str) -> Optional[float]:
    """Parse a decimal answer string, or return None."""
    text = s.strip()
    if text and text[0] in _CURRENCY:
        text = text[1:].strip()
    if text.endswith("%"):
        text = text[:-1].strip()
    text = text.replace(",", "")
    if _NUMBER_RE.fullmatch(text):
        return float(text)
    return None


def is_year(gt: str) -> bool:
    """True if the ground truth is a bare four-digit year in [1000, 2999]."""
    return _YEAR_RE.fullmatch(gt.strip()) is not None


def _within_relative_tolerance(p: float, g: float, tol: float = 0.05) -> bool:
    if g == 0:
        return p == 0
    return abs(p - g) / abs(g) <= tol


def relaxed_accuracy_chartqa(pred: str, gt: str) -> int:
    """ChartQA relaxed accuracy: ±5% for numbers, exact match for text."""
    p, g = parse_numeric(pred), parse_numeric(gt)
    if p is not None and g is not None:
        return int(_within_relative_tolerance(p, g))
    return int(pred.strip().lower() == gt.strip().lower())


def _split_list_answer(text: str) -> list[str]:
    """Split a list-valued prediction into items.

    Accepts a bracketed form ("[a, b]") or a bare comma-separated form;
    items are stripped of surrounding quotes and whitespace.
    """
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    items = [item.strip().strip("'\"").strip() for item in body.split(",")]
    return [item for item in items if item] or ([""] if not body else [])


def _pro_scalar(pred: str, gt: str, question_type: Optional[str],
                tau: float) -> float:
    """Single-item branch logic of the ChartQAPro relaxed accuracy."""
    if _canonical_question_type(question_type) in ("mcq", "factchecking"):
        return float(pred.strip() == gt.strip())
    if is_year(gt):
        return float(pred.strip() == gt.strip())
    g = parse_numeric(gt)
    if g is not None:
        p = parse_numeric(pred)
        if p is not None and _within_relative_tolerance(p, g):
            return 1.0
        # outside the tolerance (or unparseable): judged as plain strings
    return anls_similarity(pred, gt, tau)


def relaxed_accuracy_pro(pred: str, gt: GroundTruth, tau: float = 0.5) -> float:
    """ChartQAPro relaxed accuracy.

    Branch order: constrained-answer question types (MCQ, fact checking)
    need an exact match, then years need an exact match, then numerics get
    the ±5% tolerance, and everything else scores by ANLS. List answers
    score as the mean of their items aligned by index, with extra or
    missing items scoring 0.
    """
    if gt.answer_kind == "list":
        gt_items = list(gt.answers)
        pred_items = _split_list_answer(pred)
        n = max(len(gt_items), len(pred_items))
        if n == 0:
            return 1.0
        total = 0.0
        for i in range(min(len(gt_items), len(pred_items))):
            total += _pro_scalar(pred_items[i], gt_items[i], gt.question_type, tau)
        return total / n
    return max(_pro_scalar(pred, a, gt.question_type, tau) for a in gt.answers)


def vqa_score(pred: str, refs: Sequence[str]) -> float:
    """min(matching references / 3, 1) after answer normalization."""
    if not refs:
        raise ValueError("vqa_score needs at least one reference answer")
    norm_pred = vqa_normalize(pred)
    n_agree = sum(vqa_normalize(ref) == norm_pred for ref in refs)
    return min(n_agree / 3.0, 1.0)


def aggregate(scores: Sequence[Union[MetricScore, float]]) -> float:
    """Arithmetic mean over per-sample scores."""
    if not scores:
        raise ValueError("cannot aggregate an empty score list")
    values = [s.value if isinstance(s, MetricScore) else float(s) for s in scores]
    return sum(values) / len(values)
