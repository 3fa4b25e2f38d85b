"""Weighted answer voting across the full view and sliding-window patches.

Each patch votes for its answer with weight area / (W·H); abstaining
patches vote with that weight times a configurable multiplier (0 by
default, which removes them entirely). The full-image answer votes with a
fixed weight of 1. When every patch abstains (total patch weight 0) the
full-image answer is returned as-is, even if it is itself an abstention.

Two readings exist for a full-image abstention: weight 1 like any other
full-image answer, or weight 0 like every other abstention. The default
here zeroes it (the fallback still returns it when every patch also
abstained); ``full_unanswerable_keeps_weight`` restores the unconditional
weight-1 form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from damqa.backend import Prediction
from damqa.views import PatchRect


@dataclass
class VoteConfig:
    """Voting knobs; defaults reproduce the published scheme."""

    unanswerable_weight_multiplier: float = 0.0
    full_image_weight: float = 1.0
    full_unanswerable_keeps_weight: bool = False
    case_insensitive: bool = False
    strict_unanswerable_match: bool = False

    def __post_init__(self):
        if self.unanswerable_weight_multiplier < 0:
            raise ValueError("unanswerable_weight_multiplier must be >= 0")


@dataclass
class VoteTally:
    """Accumulated votes per answer, keyed by display answer."""

    scores: dict[str, float]
    full_answer: str
    total_patch_weight: float
    fold_case: bool = False
    # folded key -> display answer, populated when fold_case is on
    display: dict[str, str] = field(default_factory=dict)


def patch_weight(rect: PatchRect, w: int, h: int, is_unanswerable: bool,
                 cfg: VoteConfig) -> float:
    """Vote weight of one patch: its area fraction of the resized image.

    Abstaining patches get the area fraction scaled by the configured
    multiplier; the default multiplier of 0 silences them.
    """
    if w < 1 or h < 1:
        raise ValueError("image area must be positive")
    if rect.x + rect.w > w or rect.y + rect.h > h:
        raise ValueError(f"rect {rect} outside image {w}x{h}")
    ratio = rect.area / (w * h)
    if is_unanswerable:
        return cfg.unanswerable_weight_multiplier * ratio
    return ratio


def _fold(answer: str, cfg: VoteConfig) -> str:
    return answer.lower() if cfg.case_insensitive else answer


def accumulate(full: Prediction, patches: list[tuple[Prediction, float]],
               cfg: VoteConfig) -> VoteTally:
    """Accumulate votes: the full-image term plus one weighted term per patch.

    Vote equality is exact string equality on normalized answers
    (case-folded when configured). Every seen answer gets an entry, so
    zero-weight abstentions remain visible in the tally.
    """
    scores: dict[str, float] = {}
    display: dict[str, str] = {}

    def add(answer: str, weight: float) -> None:
        key = _fold(answer, cfg)
        if key not in display or answer < display[key]:
            display[key] = answer
        scores[key] = scores.get(key, 0.0) + weight

    full_weight = cfg.full_image_weight
    if full.is_unanswerable and not cfg.full_unanswerable_keeps_weight:
        full_weight = 0.0
    add(full.answer, full_weight)

    total_patch_weight = 0.0
    for prediction, weight in patches:
        add(prediction.answer, weight)
        total_patch_weight += weight

    return VoteTally(
        scores={display[k]: v for k, v in scores.items()},
        full_answer=full.answer,
        total_patch_weight=total_patch_weight,
        fold_case=cfg.case_insensitive,
        display=display,
    )


def select_answer(tally: VoteTally) -> str:
    """Pick the final answer from a tally.

    Zero total patch weight means every patch abstained: fall back to the
    full-image answer unconditionally. Otherwise take the argmax; ties
    prefer the full-image answer, then the lexicographically smallest.
    """
    if tally.total_patch_weight == 0:
        return tally.full_answer
    if not tally.scores:
        raise RuntimeError("empty tally with nonzero patch weight")
    best = max(tally.scores.values())
    tied = sorted(a for a, s in tally.scores.items() if s == best)
    full_key = tally.full_answer.lower() if tally.fold_case else tally.full_answer
    for answer in tied:
        key = answer.lower() if tally.fold_case else answer
        if key == full_key:
            return answer
    return tied[0]
