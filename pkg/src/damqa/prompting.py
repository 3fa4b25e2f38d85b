"""Prompt construction for VQA inference and judge-based grading.

The VQA prompt is a fixed-order concatenation of up to four newline-joined
segments: instruction, grounding rule, abstention rule, question. Each rule
can be toggled independently so the four-variant grid can be swept. The
shipped texts are defaults; all four are configurable because absolute
score reproduction can be sensitive to exact wording.
"""

from __future__ import annotations

from dataclasses import dataclass

from damqa.errors import TemplateError

DEFAULT_UNANSWERABLE_TOKEN = "unanswerable"

DEFAULT_INSTRUCTION = (
    "Answer the question using a single word or short phrase. "
    "Do not explain your answer."
)
DEFAULT_RULE1 = (
    "Base your answer only on what is visible in the image; "
    "do not use outside knowledge."
)
DEFAULT_RULE2 = (
    'If the image does not contain enough information to answer, '
    'reply with "unanswerable".'
)

DEFAULT_JUDGE_TEMPLATE = """You are grading a model's answer to a visual question.

Question: {{question}}
Reference answers (any one is acceptable): {{ground_truth}}
Model answer: {{prediction}}

Count how many required sub-answers the model answer covers. For a
single-answer question the total is 1; for a multi-part question the total
is the number of parts. Treat a sub-answer as matched when it is
semantically equivalent to the reference, ignoring case, punctuation, and
units written out versus abbreviated.

Reply with your reasoning, then on the final line output exactly one JSON
object of the form {"matched": <int>, "total": <int>} and nothing else.
"""


@dataclass
class PromptConfig:
    """Texts and toggles for the unified VQA prompt."""

    rule1_enabled: bool = True
    rule2_enabled: bool = True
    instruction_text: str = DEFAULT_INSTRUCTION
    rule1_text: str = DEFAULT_RULE1
    rule2_text: str = DEFAULT_RULE2
    unanswerable_token: str = DEFAULT_UNANSWERABLE_TOKEN

    def __post_init__(self):
        if not self.unanswerable_token:
            raise ValueError("unanswerable_token must be non-empty")
        if not self.instruction_text:
            raise ValueError("instruction_text must be non-empty")
        if self.rule1_enabled and not self.rule1_text:
            raise ValueError("rule1_text must be non-empty when rule 1 is enabled")
        if self.rule2_enabled and not self.rule2_text:
            raise ValueError("rule2_text must be non-empty when rule 2 is enabled")


def build_vqa_prompt(question: str, cfg: PromptConfig) -> str:
    """Concatenate instruction, enabled rules, and the question.

    The question appears verbatim as the final segment; segments are joined
    with single newlines.
    """
    if not question:
        raise ValueError("question must be non-empty")
    segments = [cfg.instruction_text]
    if cfg.rule1_enabled:
        segments.append(cfg.rule1_text)
    if cfg.rule2_enabled:
        segments.append(cfg.rule2_text)
    segments.append(question)
    return "\n".join(segments)


_PLACEHOLDERS = ("{{question}}", "{{ground_truth}}", "{{prediction}}")


def build_judge_prompt(question: str, ground_truths: list[str],
                       prediction: str, template: str = DEFAULT_JUDGE_TEMPLATE) -> str:
    """Substitute the three placeholders into a judge template.

    Ground truths are joined with "; ".
    """
    for placeholder in _PLACEHOLDERS:
        if placeholder not in template:
            raise TemplateError(f"judge template is missing {placeholder}")
    return (
        template
        .replace("{{question}}", question)
        .replace("{{ground_truth}}", "; ".join(ground_truths))
        .replace("{{prediction}}", prediction)
    )
