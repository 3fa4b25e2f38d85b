"""Per-sample pipeline orchestration, prediction persistence, scoring,
and ablation sweeps.

A prediction record serializes the full voting state, so any stored run
can be re-aggregated under a different vote configuration without
re-inference (that is how the unanswerable-weight sweep works) and every
final answer can be audited against its views.

Record schema (one JSON object per line, keys sorted):
    {"id", "final_answer", "full_answer",
     "views": [{"x", "y", "w", "h", "answer", "weight"}, ...],
     "votes": {answer: score}, "fallback_used", "error"}
views[0] is always the full view; its w/h are the resized image size.
"""

from __future__ import annotations

import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

from damqa.aggregator import VoteConfig, accumulate, patch_weight, select_answer
from damqa.backend import (
    BackendEndpoint,
    FixtureMiss,
    HttpBackend,
    MockBackend,
    Prediction,
    make_prediction,
    view_digest,
)
from damqa.config import BASELINE, RunConfig
from damqa.datasets import SampleRecord, load_canonical
from damqa.errors import (
    BackendUnavailableError,
    DataError,
    InvalidImageError,
    ProtocolError,
)
from damqa.judge import JudgeVerdict, judge_sample, llm_score
from damqa.metrics import (
    GroundTruth,
    anls_score,
    relaxed_accuracy_chartqa,
    relaxed_accuracy_pro,
    vqa_score,
)
from damqa.prompting import DEFAULT_JUDGE_TEMPLATE, build_vqa_prompt
from damqa.views import PatchRect, View, load_image, make_views, resize_longest_side

logger = logging.getLogger(__name__)

METRICS = ("anls", "racc", "racc-pro", "vqas")

SWEEP_AXES = ("window-stride", "unanswerable-weight", "prompt-rules")


def create_backend(endpoint: BackendEndpoint):
    """Instantiate the backend for an endpoint.

    base_url "mock:<path>" selects the in-process mock loaded from a
    fixture file; anything else is treated as an HTTP base URL.
    """
    if endpoint.base_url.startswith("mock:"):
        return MockBackend.from_file(endpoint.base_url[len("mock:"):])
    return HttpBackend(endpoint)


def _sample_views(cfg: RunConfig, image_path: Path) -> list[View]:
    img = resize_longest_side(load_image(image_path), cfg.resize_target)
    if cfg.mode == BASELINE:
        return make_views(img, cfg.window, cfg.stride)[:1]
    return make_views(img, cfg.window, cfg.stride)


def _assemble_record(sample_id: str, views: list[View],
                     predictions: list[Prediction], vote: VoteConfig) -> dict:
    full_pred = predictions[0]
    w, h = views[0].rect.w, views[0].rect.h
    patches = [
        (pred, patch_weight(view.rect, w, h, pred.is_unanswerable, vote))
        for view, pred in zip(views[1:], predictions[1:])
    ]
    tally = accumulate(full_pred, patches, vote)
    final = select_answer(tally)

    full_weight = vote.full_image_weight
    if full_pred.is_unanswerable and not vote.full_unanswerable_keeps_weight:
        full_weight = 0.0
    views_out = [{"x": 0, "y": 0, "w": w, "h": h,
                  "answer": full_pred.answer, "weight": full_weight}]
    for view, (pred, weight) in zip(views[1:], patches):
        views_out.append({"x": view.rect.x, "y": view.rect.y,
                          "w": view.rect.w, "h": view.rect.h,
                          "answer": pred.answer, "weight": weight})
    return {
        "id": sample_id,
        "final_answer": final,
        "full_answer": full_pred.answer,
        "views": views_out,
        "votes": tally.scores,
        "fallback_used": tally.total_patch_weight == 0 and len(views) > 1,
        "error": None,
    }


def _error_record(sample_id: str, message: str) -> dict:
    return {"id": sample_id, "final_answer": "", "full_answer": "",
            "views": [], "votes": {}, "fallback_used": False, "error": message}


def reaggregate_record(record: dict, vote: VoteConfig,
                       token: str = "unanswerable",
                       strict_token: bool = False) -> dict:
    """Re-run voting over a stored record's views under a vote config.

    Returns {"final_answer", "votes", "fallback_used"}. With the original
    config this must reproduce the stored final answer (audit invariant).
    """
    views = record["views"]
    if not views:
        return {"final_answer": record["final_answer"],
                "votes": dict(record["votes"]),
                "fallback_used": record["fallback_used"]}
    w, h = views[0]["w"], views[0]["h"]
    full = make_prediction(0, views[0]["answer"], token, strict_token)
    patches = []
    for i, entry in enumerate(views[1:], start=1):
        pred = make_prediction(i, entry["answer"], token, strict_token)
        rect = PatchRect(x=entry["x"], y=entry["y"], w=entry["w"], h=entry["h"])
        patches.append((pred, patch_weight(rect, w, h, pred.is_unanswerable, vote)))
    tally = accumulate(full, patches, vote)
    return {
        "final_answer": select_answer(tally),
        "votes": tally.scores,
        "fallback_used": tally.total_patch_weight == 0 and len(views) > 1,
    }


def run_evaluation(cfg: RunConfig, dataset_path: Union[str, Path],
                   images_root: Union[str, Path], out_path: Union[str, Path],
                   backend=None) -> dict:
    """Run the full pipeline over a dataset and write prediction records.

    Per-sample backend failures are recorded and the run continues; the
    summary reports counts and wall time. Output order follows dataset
    order regardless of completion order, and reruns with identical inputs
    are byte-identical.
    """
    samples = load_canonical(dataset_path, images_root)
    if backend is None:
        backend = create_backend(cfg.backend)
    backend.probe()

    started = time.monotonic()
    failed = 0
    root = Path(images_root)
    records: list[dict] = []
    token = cfg.prompt.unanswerable_token
    strict_token = cfg.vote.strict_unanswerable_match

    with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
        for sample in samples:
            try:
                views = _sample_views(cfg, root / sample.image)
                prompt = build_vqa_prompt(sample.question, cfg.prompt)
                params = replace(cfg.generation,
                                 max_new_tokens=cfg.max_new_tokens_for(sample.dataset))
                raw_answers = list(pool.map(
                    lambda view: backend.infer(view, prompt, params,
                                               sample_id=sample.id),
                    views,
                ))
                predictions = [
                    make_prediction(view.index, raw, token, strict_token)
                    for view, raw in zip(views, raw_answers)
                ]
                records.append(_assemble_record(sample.id, views, predictions,
                                                cfg.vote))
            except (InvalidImageError, BackendUnavailableError, ProtocolError,
                    FixtureMiss) as exc:
                logger.error("sample %s failed: %s", sample.id, exc)
                failed += 1
                records.append(_error_record(sample.id, str(exc)))

    with open(out_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")

    summary = {
        "samples": len(samples),
        "failed": failed,
        "wall_time_s": round(time.monotonic() - started, 3),
        "out": str(out_path),
    }
    print(f"run: {summary['samples']} samples, {failed} failed, "
          f"{summary['wall_time_s']}s -> {out_path}", file=sys.stderr)
    return summary


def load_predictions(path: Union[str, Path]) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if "id" not in record:
                raise DataError(f"{path}:{lineno}: prediction record has no id")
            records.append(record)
    return records


@dataclass
class ScoreReport:
    """Per-sample and aggregate metric values plus the scoring config."""

    metric: str
    tau: float
    aggregate: float
    num_samples: int
    per_sample: list[dict]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "tau": self.tau,
            "aggregate": self.aggregate,
            "num_samples": self.num_samples,
            "per_sample": self.per_sample,
        }


def _score_one(metric: str, answer: str, sample: SampleRecord, tau: float) -> float:
    answers = list(sample.answers)
    if metric == "anls":
        return anls_score(answer, answers, tau)
    if metric == "racc":
        return float(max(relaxed_accuracy_chartqa(answer, gt) for gt in answers))
    if metric == "racc-pro":
        gt = GroundTruth(answers=tuple(answers),
                         question_type=sample.question_type,
                         answer_kind=sample.answer_kind)
        return relaxed_accuracy_pro(answer, gt, tau)
    if metric == "vqas":
        return vqa_score(answer, answers)
    raise ValueError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}")


def score_predictions(preds_path: Union[str, Path],
                      dataset_path: Union[str, Path],
                      metric: str, tau: float = 0.5) -> ScoreReport:
    """Score a predictions file against its dataset.

    Failed samples carry an empty answer and simply score 0; they stay in
    the denominator.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}")
    samples = {s.id: s for s in load_canonical(dataset_path)}
    predictions = load_predictions(preds_path)
    missing = [p["id"] for p in predictions if p["id"] not in samples]
    if missing:
        raise DataError("prediction ids missing from dataset: "
                        + ", ".join(missing[:20])
                        + (" ..." if len(missing) > 20 else ""))
    per_sample = []
    for pred in predictions:
        score = _score_one(metric, pred.get("final_answer", ""),
                           samples[pred["id"]], tau)
        per_sample.append({"id": pred["id"], "score": score})
    total = sum(entry["score"] for entry in per_sample)
    return ScoreReport(
        metric=metric,
        tau=tau,
        aggregate=total / len(per_sample) if per_sample else 0.0,
        num_samples=len(per_sample),
        per_sample=per_sample,
    )


def judge_predictions(preds_path: Union[str, Path],
                      dataset_path: Union[str, Path],
                      backend, template: str = DEFAULT_JUDGE_TEMPLATE) -> dict:
    """Grade every prediction with the judge backend."""
    samples = {s.id: s for s in load_canonical(dataset_path)}
    predictions = load_predictions(preds_path)
    missing = [p["id"] for p in predictions if p["id"] not in samples]
    if missing:
        raise DataError("prediction ids missing from dataset: " + ", ".join(missing[:20]))
    verdicts: list[JudgeVerdict] = []
    rows = []
    for pred in predictions:
        sample = samples[pred["id"]]
        verdict = judge_sample(sample.question, list(sample.answers),
                               pred.get("final_answer", ""), backend, template)
        verdicts.append(verdict)
        rows.append({"id": pred["id"], "matched": verdict.matched,
                     "total": verdict.total, "score": verdict.score,
                     "parse_error": verdict.parse_error,
                     "backend_error": verdict.backend_error})
    return {"llm_score": llm_score(verdicts), "num_samples": len(rows),
            "per_sample": rows}


def count_non_abstained(records: list[dict], token: str = "unanswerable") -> int:
    """Records whose final answer is a real answer, not the abstention token."""
    from damqa.backend import is_unanswerable

    return sum(
        1 for r in records
        if r.get("error") is None and not is_unanswerable(r["final_answer"], token)
    )


def _format_table(headers: list[str], rows: list[list]) -> str:
    cells = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)))
        if r == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(headers))))
    return "\n".join(lines) + "\n"


def sweep(cfg: RunConfig, axis: str, values: list,
          dataset_path: Union[str, Path], images_root: Union[str, Path],
          out_dir: Union[str, Path], backend=None,
          metric: Optional[str] = None, tau: float = 0.5) -> str:
    """Run an ablation sweep and write per-value predictions plus a table.

    window-stride and prompt-rules change inference, so each value is a
    fresh run; the unanswerable-weight axis re-aggregates one cached run.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []

    def maybe_score(preds_path: Path) -> Optional[float]:
        if metric is None:
            return None
        return score_predictions(preds_path, dataset_path, metric, tau).aggregate

    if axis == "window-stride":
        headers = ["window", "stride", "mean_patches", metric or "score"]
        for window, stride in values:
            run_cfg = replace(cfg, window=window, stride=stride)
            preds_path = out / f"preds_w{window}_s{stride}.jsonl"
            run_evaluation(run_cfg, dataset_path, images_root, preds_path, backend)
            records = load_predictions(preds_path)
            ok = [r for r in records if r.get("error") is None]
            mean_patches = (sum(len(r["views"]) - 1 for r in ok) / len(ok)) if ok else 0.0
            rows.append([window, stride, round(mean_patches, 2),
                         _fmt(maybe_score(preds_path))])
    elif axis == "unanswerable-weight":
        headers = ["weight", "non_abstained", metric or "score"]
        base_path = out / "preds_base.jsonl"
        run_evaluation(cfg, dataset_path, images_root, base_path, backend)
        base_records = load_predictions(base_path)
        token = cfg.prompt.unanswerable_token
        strict = cfg.vote.strict_unanswerable_match
        for weight in values:
            vote = replace(cfg.vote, unanswerable_weight_multiplier=weight)
            out_records = []
            for record in base_records:
                re_agg = reaggregate_record(record, vote, token, strict)
                merged = dict(record)
                merged.update(re_agg)
                out_records.append(merged)
            preds_path = out / f"preds_weight_{weight}.jsonl"
            with open(preds_path, "w", encoding="utf-8") as fh:
                for record in out_records:
                    fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            rows.append([weight, count_non_abstained(out_records, token),
                         _fmt(maybe_score(preds_path))])
    else:  # prompt-rules
        headers = ["rule1", "rule2", metric or "score"]
        for rule1, rule2 in values:
            prompt_cfg = replace(cfg.prompt, rule1_enabled=rule1, rule2_enabled=rule2)
            run_cfg = replace(cfg, prompt=prompt_cfg)
            tag = f"{'r1' if rule1 else 'no1'}_{'r2' if rule2 else 'no2'}"
            preds_path = out / f"preds_rules_{tag}.jsonl"
            run_evaluation(run_cfg, dataset_path, images_root, preds_path, backend)
            rows.append(["on" if rule1 else "off", "on" if rule2 else "off",
                         _fmt(maybe_score(preds_path))])

    table = _format_table(headers, rows)
    (out / "table.txt").write_text(table, encoding="utf-8")
    return table


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def export_digest_fixtures(cfg: RunConfig, dataset_path: Union[str, Path],
                           images_root: Union[str, Path], mock: MockBackend) -> dict:
    """Translate per-view mock answers into content-digest fixtures.

    Walks the exact view/prompt pipeline a run would execute and keys each
    answer by its wire-request digest, producing a fixture file a
    wire-protocol fixture server can serve.
    """
    samples = load_canonical(dataset_path, images_root)
    root = Path(images_root)
    by_digest: dict[str, str] = {}
    for sample in samples:
        views = _sample_views(cfg, root / sample.image)
        prompt = build_vqa_prompt(sample.question, cfg.prompt)
        params = replace(cfg.generation,
                         max_new_tokens=cfg.max_new_tokens_for(sample.dataset))
        for view in views:
            answer = mock.infer(view, prompt, params, sample_id=sample.id)
            by_digest[view_digest(view, prompt)] = answer
    return {"infer": by_digest}
