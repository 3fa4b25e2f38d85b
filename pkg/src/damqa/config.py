"""Run configuration: defaults, JSON config file loading, env overrides.

The config file is a single JSON object mirroring RunConfig; omitted
fields take the defaults below. DAMQA_BACKEND_URL and DAMQA_JUDGE_URL
override the respective base URLs.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from damqa.aggregator import VoteConfig
from damqa.backend import BackendEndpoint, GenerationParams
from damqa.errors import DataError
from damqa.prompting import PromptConfig

logger = logging.getLogger(__name__)

BASELINE = "baseline"
SLIDING = "sliding"

# Dataset-specific output budgets; working guesses, overridable via the
# "token_limits" config map.
DATASET_MAX_NEW_TOKENS = {
    "docvqa": 32,
    "infographicvqa": 32,
    "textvqa": 16,
    "chartqa": 32,
    "chartqapro": 64,
    "vqav2": 16,
}


@dataclass
class RunConfig:
    """Everything a run needs; the pipeline itself uses no RNG."""

    mode: str = SLIDING
    resize_target: int = 1024
    window: int = 512
    stride: int = 256
    concurrency: int = 1
    prompt: PromptConfig = field(default_factory=PromptConfig)
    vote: VoteConfig = field(default_factory=VoteConfig)
    generation: GenerationParams = field(default_factory=GenerationParams)
    backend: BackendEndpoint = field(
        default_factory=lambda: BackendEndpoint(base_url="http://127.0.0.1:8000"))
    token_limits: dict = field(default_factory=lambda: dict(DATASET_MAX_NEW_TOKENS))
    max_failure_ratio: float = 0.5
    seedless: bool = True  # documents that the run is deterministic by construction

    def __post_init__(self):
        if self.mode not in (BASELINE, SLIDING):
            raise ValueError(f"mode must be {BASELINE!r} or {SLIDING!r}")
        if self.resize_target < 1:
            raise ValueError("resize_target must be >= 1")
        if self.window < 1 or self.stride < 1:
            raise ValueError("window and stride must be >= 1")
        if self.window > self.resize_target:
            raise ValueError("window must not exceed resize_target")
        if self.stride > self.window:
            # Residual patches still cover the edges, but interior gaps appear.
            logger.warning("stride %d exceeds window %d: interior coverage gaps",
                           self.stride, self.window)
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")

    def max_new_tokens_for(self, dataset: str) -> int:
        return self.token_limits.get(dataset, self.generation.max_new_tokens)


def _build(section: Optional[dict], cls):
    return cls(**section) if section else cls()


def load_run_config(path: Optional[Union[str, Path]] = None,
                    overrides: Optional[dict] = None) -> RunConfig:
    """Load a RunConfig from a JSON file, applying env and CLI overrides."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except ValueError as exc:
            raise DataError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise DataError(f"config file {path} must hold a JSON object")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})

    backend_section = dict(raw.get("backend") or {})
    env_url = os.environ.get("DAMQA_BACKEND_URL")
    if env_url:
        backend_section["base_url"] = env_url
    backend_section.setdefault("base_url", "http://127.0.0.1:8000")

    try:
        return RunConfig(
            mode=raw.get("mode", SLIDING),
            resize_target=raw.get("resize_target", 1024),
            window=raw.get("window", 512),
            stride=raw.get("stride", 256),
            concurrency=raw.get("concurrency", 1),
            prompt=_build(raw.get("prompt"), PromptConfig),
            vote=_build(raw.get("vote"), VoteConfig),
            generation=_build(raw.get("generation"), GenerationParams),
            backend=BackendEndpoint(**backend_section),
            token_limits=raw.get("token_limits", dict(DATASET_MAX_NEW_TOKENS)),
            max_failure_ratio=raw.get("max_failure_ratio", 0.5),
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid run config: {exc}") from exc


def judge_endpoint(url: Optional[str] = None) -> BackendEndpoint:
    """Endpoint for the judge backend; DAMQA_JUDGE_URL wins over the default."""
    base = url or os.environ.get("DAMQA_JUDGE_URL") or "http://127.0.0.1:8001"
    return BackendEndpoint(base_url=base)
