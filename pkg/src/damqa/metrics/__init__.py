"""Metric suite: edit distance, ANLS, relaxed accuracy, VQA score."""

from damqa.metrics.core import (
    GroundTruth,
    MetricScore,
    aggregate,
    anls_score,
    anls_similarity,
    is_year,
    levenshtein,
    parse_numeric,
    relaxed_accuracy_chartqa,
    relaxed_accuracy_pro,
    vqa_normalize,
    vqa_score,
)
from damqa.metrics.editdist import BACKEND as EDITDIST_BACKEND

__all__ = [
    "GroundTruth",
    "MetricScore",
    "aggregate",
    "anls_score",
    "anls_similarity",
    "is_year",
    "levenshtein",
    "parse_numeric",
    "relaxed_accuracy_chartqa",
    "relaxed_accuracy_pro",
    "vqa_normalize",
    "vqa_score",
    "EDITDIST_BACKEND",
]
