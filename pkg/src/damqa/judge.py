"""LLM-as-a-judge scoring over a text-completion backend.

The judge prompt instructs the model to end with a one-line JSON verdict
{"matched": m, "total": t}; parsing takes the last well-formed verdict in
the reply so leading reasoning text is harmless. A sample whose reply
cannot be parsed after one retry scores (0, 1) and is flagged; a backend
failure likewise scores (0, 1).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from damqa.backend import GenerationParams
from damqa.errors import BackendUnavailableError, JudgeParseError, ProtocolError
from damqa.prompting import DEFAULT_JUDGE_TEMPLATE, build_judge_prompt

_VERDICT_RE = re.compile(r"\{[^{}]*\}")

# Matches the generation settings used for inference, for reproducibility.
JUDGE_PARAMS = GenerationParams(temperature=1e-7, top_p=0.5, num_beams=1,
                                max_new_tokens=512)


@dataclass(frozen=True)
class JudgeVerdict:
    """Matched sub-answers out of total, as reported by the judge."""

    matched: int
    total: int
    raw_text: str
    parse_error: bool = False
    backend_error: bool = False

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("total must be >= 1")
        if not 0 <= self.matched <= self.total:
            raise ValueError("matched must be in [0, total]")

    @property
    def score(self) -> float:
        return self.matched / self.total


def parse_judge_output(text: str) -> tuple[int, int]:
    """Extract the last well-formed verdict object from a judge reply."""
    verdict = None
    for chunk in _VERDICT_RE.findall(text):
        try:
            obj = json.loads(chunk)
        except ValueError:
            continue
        if not isinstance(obj, dict):
            continue
        m, t = obj.get("matched"), obj.get("total")
        if isinstance(m, bool) or isinstance(t, bool):
            continue
        if isinstance(m, int) and isinstance(t, int) and t >= 1 and 0 <= m <= t:
            verdict = (m, t)
    if verdict is None:
        raise JudgeParseError(f"no valid verdict in judge reply: {text[:200]!r}")
    return verdict


def judge_sample(question: str, gts: Sequence[str], pred: str, backend,
                 template: str = DEFAULT_JUDGE_TEMPLATE,
                 params: GenerationParams = JUDGE_PARAMS) -> JudgeVerdict:
    """Grade one prediction; retries the completion once on a parse failure."""
    prompt = build_judge_prompt(question, list(gts), pred, template)
    reply = ""
    for _ in range(2):
        try:
            reply = backend.complete(prompt, params)
        except (BackendUnavailableError, ProtocolError):
            return JudgeVerdict(0, 1, reply, backend_error=True)
        try:
            matched, total = parse_judge_output(reply)
            return JudgeVerdict(matched, total, reply)
        except JudgeParseError:
            continue
    return JudgeVerdict(0, 1, reply, parse_error=True)


def llm_score(verdicts: Sequence[JudgeVerdict]) -> float:
    """Mean of matched/total over all samples."""
    if not verdicts:
        raise ValueError("cannot score an empty verdict list")
    return sum(v.score for v in verdicts) / len(verdicts)
