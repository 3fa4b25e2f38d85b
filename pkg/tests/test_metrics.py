"""Metric suite: edit distance oracle, ANLS, relaxed accuracy, VQA score."""

import random

import pytest

from damqa.metrics import (
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
from damqa.metrics._editdist_py import levenshtein as levenshtein_py


def recursive_levenshtein(a: str, b: str) -> int:
    """Exponential recursive oracle, only usable on short strings."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    cost = a[-1] != b[-1]
    return min(
        recursive_levenshtein(a[:-1], b) + 1,
        recursive_levenshtein(a, b[:-1]) + 1,
        recursive_levenshtein(a[:-1], b[:-1]) + cost,
    )


def random_string(rng, max_len=6, alphabet="abcde"):
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, max_len + 1)))


class TestLevenshtein:
    def test_insertions(self):
        assert levenshtein("", "abc") == 3

    def test_identity(self):
        assert levenshtein("same", "same") == 0

    def test_kitten_sitting(self):
        assert recursive_levenshtein("kitten", "sitting") == 3
        assert levenshtein("kitten", "sitting") == 3

    def test_matches_recursive_oracle(self):
        rng = random.Random(11)
        for _ in range(300):
            a, b = random_string(rng), random_string(rng)
            assert levenshtein(a, b) == recursive_levenshtein(a, b), (a, b)

    def test_compiled_and_python_backends_agree(self):
        rng = random.Random(12)
        for _ in range(300):
            a, b = random_string(rng, max_len=12, alphabet="abcdé "), \
                   random_string(rng, max_len=12, alphabet="abcdé ")
            assert levenshtein(a, b) == levenshtein_py(a, b), (a, b)

    def test_metric_properties(self):
        rng = random.Random(13)
        for _ in range(100):
            a, b, c = (random_string(rng) for _ in range(3))
            assert levenshtein(a, b) == levenshtein(b, a)
            assert (levenshtein(a, b) == 0) == (a == b)
            assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    def test_unicode(self):
        assert levenshtein("café", "cafe") == 1


class TestAnls:
    def test_identical(self):
        assert anls_similarity("graz", "graz") == 1.0

    def test_near_match(self):
        assert anls_similarity("kitten", "sitting") == pytest.approx(1 - 3 / 7)

    def test_cutoff(self):
        assert anls_similarity("abc", "xyz") == 0.0

    def test_both_empty(self):
        assert anls_similarity("", "") == 1.0

    def test_case_folded_by_default(self):
        assert anls_similarity("Graz", "graz") == 1.0
        assert anls_similarity("Graz", "graz", fold_case=False) < 1.0

    def test_symmetry_and_range(self):
        rng = random.Random(14)
        for _ in range(200):
            a, b = random_string(rng, 8), random_string(rng, 8)
            s = anls_similarity(a, b)
            assert s == anls_similarity(b, a)
            assert 0.0 <= s <= 1.0
            assert (s == 1.0) == (a.strip().lower() == b.strip().lower())

    def test_score_takes_max(self):
        assert anls_score("graz", ["x", "graz", "y"]) == 1.0
        assert anls_score("xyz", ["abc"]) == 0.0

    def test_score_monotone_in_ground_truth_set(self):
        rng = random.Random(15)
        for _ in range(100):
            pred = random_string(rng, 8)
            gts = [random_string(rng, 8) for _ in range(rng.randrange(1, 4))]
            extra = gts + [random_string(rng, 8)]
            assert anls_score(pred, extra) >= anls_score(pred, gts)

    def test_empty_ground_truths_rejected(self):
        with pytest.raises(ValueError):
            anls_score("x", [])

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            anls_similarity("a", "b", tau=0.0)


class TestNumericParsing:
    @pytest.mark.parametrize("text,expected", [
        ("1,234", 1234.0), ("45%", 45.0), ("abc", None), ("$1,234.56", 1234.56),
        ("-3.2", -3.2), (" 7 ", 7.0), ("€12", 12.0), (".5", 0.5),
        ("12%extra", None), ("", None), ("1 234", None), ("inf", None),
        ("nan", None), ("1e6", None),
    ])
    def test_cases(self, text, expected):
        assert parse_numeric(text) == expected

    @pytest.mark.parametrize("text,expected", [
        ("2020", True), ("100", False), ("1,234", False), ("1000", True),
        ("2999", True), ("3000", False), ("999", False), ("20 20", False),
        ("2020.0", False), (" 1984 ", True),
    ])
    def test_is_year(self, text, expected):
        assert is_year(text) is expected


class TestRelaxedAccuracyChartqa:
    def test_within_tolerance(self):
        assert relaxed_accuracy_chartqa("104", "100") == 1

    def test_outside_tolerance(self):
        assert relaxed_accuracy_chartqa("106", "100") == 0

    def test_text_case_insensitive(self):
        assert relaxed_accuracy_chartqa("Asia", "asia") == 1

    def test_zero_ground_truth_requires_exact_zero(self):
        assert relaxed_accuracy_chartqa("0", "0") == 1
        assert relaxed_accuracy_chartqa("0.001", "0") == 0

    def test_percent_and_separator_forms(self):
        assert relaxed_accuracy_chartqa("45%", "45") == 1
        assert relaxed_accuracy_chartqa("1,234", "1234") == 1


class TestRelaxedAccuracyPro:
    def test_mcq_exact_match(self):
        gt = GroundTruth(answers=("B",), question_type="MCQ")
        assert relaxed_accuracy_pro("B", gt) == 1.0
        assert relaxed_accuracy_pro("A", gt) == 0.0

    def test_fact_checking_exact_match(self):
        gt = GroundTruth(answers=("True",), question_type="FactChecking")
        assert relaxed_accuracy_pro("True", gt) == 1.0
        # no numeric tolerance or ANLS in this branch
        assert relaxed_accuracy_pro("Tru", gt) == 0.0

    def test_year_exact_match(self):
        gt = GroundTruth(answers=("2020",))
        assert relaxed_accuracy_pro("2020", gt) == 1.0
        assert relaxed_accuracy_pro("2019", gt) == 0.0

    def test_numeric_tolerance(self):
        gt = GroundTruth(answers=("100",))
        assert relaxed_accuracy_pro("104", gt) == 1.0
        # outside tolerance falls through to ANLS of the string forms
        assert relaxed_accuracy_pro("106", gt) == anls_similarity("106", "100")

    def test_text_falls_back_to_anls(self):
        gt = GroundTruth(answers=("kitten",))
        assert relaxed_accuracy_pro("sitting", gt) == pytest.approx(1 - 3 / 7)

    def test_list_mean(self):
        gt = GroundTruth(answers=("a", "b"), answer_kind="list")
        assert relaxed_accuracy_pro("[a, c]", gt) == 0.5

    def test_list_length_mismatch_scores_missing_as_zero(self):
        gt = GroundTruth(answers=("a", "b", "c", "d"), answer_kind="list")
        assert relaxed_accuracy_pro("[a, b]", gt) == 0.5
        gt2 = GroundTruth(answers=("a",), answer_kind="list")
        assert relaxed_accuracy_pro("[a, b]", gt2) == 0.5

    def test_branches_mutually_exclusive_and_exhaustive(self):
        # every (question_type, ground-truth shape) pair lands in exactly
        # one branch; probe each with a prediction only that branch accepts
        cases = [
            # (qtype, gt, hit_pred, near_pred, near_score)
            ("MCQ", "7", "7", "7.1", 0.0),          # exact only, no tolerance
            ("FactChecking", "yes", "yes", "yse", 0.0),
            (None, "2020", "2020", "2021", 0.0),    # year: exact only
            (None, "100", "104", "106", anls_similarity("106", "100")),
            (None, "word", "word", "wore", anls_similarity("wore", "word")),
        ]
        for qtype, gt_text, hit, near, near_score in cases:
            gt = GroundTruth(answers=(gt_text,), question_type=qtype)
            assert relaxed_accuracy_pro(hit, gt) == 1.0
            assert relaxed_accuracy_pro(near, gt) == pytest.approx(near_score)


class TestVqaNormalize:
    @pytest.mark.parametrize("text,expected", [
        ("The Cat.", "cat"), ("two", "2"), ("dog", "dog"),
        ("A man's hat", "man's hat"), ("1,234", "1234"),
        ("don't", "don't"), ("dont", "don't"), ("blue-gray", "blue gray"),
        ("  lots   of\tspace ", "lots of space"), ("3.5", "3.5"),
    ])
    def test_cases(self, text, expected):
        assert vqa_normalize(text) == expected

    def test_idempotent(self):
        rng = random.Random(16)
        samples = ["The Cat.", "two", "dont", "1,234 things", "a b c!",
                   "none", "o'clock at ten"]
        samples += ["".join(rng.choice("ab ,.!'-") for _ in range(10))
                    for _ in range(100)]
        for s in samples:
            once = vqa_normalize(s)
            assert vqa_normalize(once) == once, repr(s)


class TestVqaScore:
    def test_cap_at_three_matches(self):
        refs = ["cat"] * 3 + ["dog"] * 7
        assert vqa_score("cat", refs) == 1.0

    def test_single_match(self):
        refs = ["cat"] + ["dog"] * 9
        assert vqa_score("cat", refs) == pytest.approx(1 / 3)

    def test_no_match(self):
        assert vqa_score("fish", ["cat"] * 10) == 0.0

    def test_normalization_applied_to_both_sides(self):
        assert vqa_score("Two", ["2", "two", "TWO."]) == 1.0

    def test_discrete_range_with_three_plus_refs(self):
        rng = random.Random(17)
        answers = ["cat", "dog", "2", "two"]
        for _ in range(100):
            refs = [rng.choice(answers) for _ in range(rng.randrange(3, 11))]
            score = vqa_score(rng.choice(answers), refs)
            assert score in (0.0, 1 / 3, 2 / 3, 1.0)

    def test_empty_refs_rejected(self):
        with pytest.raises(ValueError):
            vqa_score("x", [])


class TestAggregate:
    def test_simple_means(self):
        assert aggregate([1.0, 0.0]) == 0.5
        assert aggregate([1.0, 1.0, 1.0]) == 1.0

    def test_mean_of_metric_scores(self):
        scores = [MetricScore(1 - 3 / 7, "ANLS"), MetricScore(0.0, "ANLS")]
        assert aggregate(scores) == pytest.approx((1 - 3 / 7) / 2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_metric_score_range_checked(self):
        with pytest.raises(ValueError):
            MetricScore(1.5, "ANLS")
