"""Client side of the model-serving wire protocol, plus a deterministic
mock backend for tests and offline runs.

Wire protocol (HTTP/1.1, application/json; field names are contractual):

* POST {base_url}/v1/infer
  request  {"image": "<base64 PNG RGB>", "mask": "<base64 PNG 8-bit gray>",
            "prompt": "<text>",
            "generation": {"temperature": r, "top_p": r,
                           "num_beams": n, "max_new_tokens": n}}
  response 200 {"answer": "<text>"}; 400 malformed; 503 retryable.

* POST {base_url}/v1/complete  (text-only, used for judging)
  request  {"prompt": "<text>", "generation": {...}}
  response 200 {"text": "<text>"}

DAMQA_BACKEND_URL overrides the configured base URL.
"""

from __future__ import annotations

import base64
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import requests

from damqa.errors import BackendUnavailableError, ProtocolError
from damqa.prompting import DEFAULT_UNANSWERABLE_TOKEN
from damqa.views import View, encode_mask_png, encode_png

RETRYABLE_STATUS = (503,)


@dataclass
class GenerationParams:
    """Decoding settings sent with every request."""

    temperature: float = 1e-7
    top_p: float = 0.5
    num_beams: int = 1
    max_new_tokens: int = 32

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must be in (0, 1]")
        if self.num_beams < 1:
            raise ValueError("num_beams must be >= 1")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")

    def to_wire(self) -> dict:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "num_beams": self.num_beams,
            "max_new_tokens": self.max_new_tokens,
        }


@dataclass
class BackendEndpoint:
    """Connection settings for one wire-protocol server."""

    base_url: str
    timeout: float = 60.0
    max_retries: int = 2
    retry_backoff: float = 1.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.retry_backoff < 0:
            raise ValueError("retry_backoff must be >= 0")


@dataclass(frozen=True)
class Prediction:
    """One view's answer after post-processing."""

    view_index: int
    answer: str
    raw_answer: str
    is_unanswerable: bool


def normalize_answer(raw: str) -> str:
    """Strip leading/trailing whitespace; interior content is untouched."""
    return raw.strip()


def is_unanswerable(answer: str, token: str = DEFAULT_UNANSWERABLE_TOKEN,
                    strict: bool = False) -> bool:
    """Classify an already-normalized answer as an abstention.

    Default mode ignores case and one trailing period, since model outputs
    vary in both; strict mode requires an exact token match.
    """
    if strict:
        return answer == token
    candidate = answer
    if candidate.endswith("."):
        candidate = candidate[:-1]
    return candidate.lower() == token.lower()


def make_prediction(view_index: int, raw_answer: str,
                    token: str = DEFAULT_UNANSWERABLE_TOKEN,
                    strict: bool = False) -> Prediction:
    """Normalize a raw backend answer and classify abstention."""
    answer = normalize_answer(raw_answer)
    return Prediction(
        view_index=view_index,
        answer=answer,
        raw_answer=raw_answer,
        is_unanswerable=is_unanswerable(answer, token, strict),
    )


def infer_request_body(view: View, prompt: str, params: GenerationParams) -> dict:
    """Encode a view and prompt into the /v1/infer request body."""
    return {
        "image": base64.b64encode(encode_png(view.image)).decode("ascii"),
        "mask": base64.b64encode(encode_mask_png(view.mask)).decode("ascii"),
        "prompt": prompt,
        "generation": params.to_wire(),
    }


def infer_digest(image_png: bytes, mask_png: bytes, prompt: str) -> str:
    """Content digest identifying an /v1/infer request.

    sha256 over image PNG bytes, mask PNG bytes, and UTF-8 prompt, joined
    by NUL separators. Fixture servers key on this.
    """
    h = hashlib.sha256()
    h.update(image_png)
    h.update(b"\x00")
    h.update(mask_png)
    h.update(b"\x00")
    h.update(prompt.encode("utf-8"))
    return h.hexdigest()


def complete_digest(prompt: str) -> str:
    """Content digest identifying a /v1/complete request."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def view_digest(view: View, prompt: str) -> str:
    """Digest of a view exactly as it would go over the wire."""
    return infer_digest(encode_png(view.image), encode_mask_png(view.mask), prompt)


class HttpBackend:
    """Wire-protocol client with bounded retries.

    Shareable across threads; each request is independent. Transient
    failures (connection errors, timeouts, 503) are retried up to
    max_retries with linear backoff; anything else is terminal.
    """

    def __init__(self, endpoint: BackendEndpoint):
        self.endpoint = endpoint
        self._session = requests.Session()

    def _post(self, path: str, body: dict) -> dict:
        url = self.endpoint.base_url.rstrip("/") + path
        last_error: Optional[str] = None
        for attempt in range(self.endpoint.max_retries + 1):
            if attempt > 0:
                time.sleep(self.endpoint.retry_backoff * attempt)
            try:
                resp = self._session.post(url, json=body, timeout=self.endpoint.timeout)
            except requests.RequestException as exc:
                last_error = str(exc)
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = f"server busy ({resp.status_code})"
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"{path} returned {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"{path} returned non-JSON body") from exc
        raise BackendUnavailableError(f"{url} unreachable after "
                                      f"{self.endpoint.max_retries + 1} attempts: {last_error}")

    def probe(self) -> None:
        """Check reachability: any HTTP response counts, including 400."""
        url = self.endpoint.base_url.rstrip("/") + "/v1/infer"
        try:
            self._session.post(url, json={}, timeout=self.endpoint.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailableError(f"backend probe failed: {exc}") from exc

    def infer(self, view: View, prompt: str, params: GenerationParams,
              sample_id: Optional[str] = None) -> str:
        """Run one view through the model; returns the raw answer verbatim."""
        payload = self._post("/v1/infer", infer_request_body(view, prompt, params))
        if "answer" not in payload or not isinstance(payload["answer"], str):
            raise ProtocolError('/v1/infer response is missing an "answer" string')
        return payload["answer"]

    def complete(self, prompt: str, params: GenerationParams) -> str:
        """Text-only completion, used for judging."""
        payload = self._post("/v1/complete", {"prompt": prompt,
                                              "generation": params.to_wire()})
        if "text" not in payload or not isinstance(payload["text"], str):
            raise ProtocolError('/v1/complete response is missing a "text" string')
        return payload["text"]


class FixtureMiss(KeyError):
    """A mock or fixture server has no answer for the request."""


class MockBackend:
    """Deterministic in-process backend.

    Answers are looked up by (sample id, view index) from a fixture
    mapping, or by request content digest when keyed fixtures are absent.
    Identical requests always produce identical answers, so runs against
    the mock are bit-reproducible.

    Fixture file schema (JSON):
        {"by_view":   {"<sample_id>": {"<view_index>": "<answer>"}},
         "by_digest": {"<infer digest>": "<answer>"},
         "default":   "<answer>",            # optional infer fallback
         "complete":  {"<prompt digest>": "<text>"},
         "complete_default": "<text>"}       # optional complete fallback
    """

    def __init__(self, by_view: Optional[dict] = None,
                 by_digest: Optional[dict] = None,
                 default: Optional[str] = None,
                 complete_fixtures: Optional[dict] = None,
                 complete_default: Optional[str] = None):
        self.by_view = by_view or {}
        self.by_digest = by_digest or {}
        self.default = default
        self.complete_fixtures = complete_fixtures or {}
        self.complete_default = complete_default

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "MockBackend":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            by_view=raw.get("by_view"),
            by_digest=raw.get("by_digest"),
            default=raw.get("default"),
            complete_fixtures=raw.get("complete"),
            complete_default=raw.get("complete_default"),
        )

    def probe(self) -> None:
        return None

    def infer(self, view: View, prompt: str, params: GenerationParams,
              sample_id: Optional[str] = None) -> str:
        if sample_id is not None and sample_id in self.by_view:
            answers = self.by_view[sample_id]
            key = str(view.index)
            if key in answers:
                return answers[key]
        if self.by_digest:
            digest = view_digest(view, prompt)
            if digest in self.by_digest:
                return self.by_digest[digest]
        if self.default is not None:
            return self.default
        raise FixtureMiss(f"no fixture answer for sample={sample_id!r} "
                          f"view={view.index}")

    def complete(self, prompt: str, params: GenerationParams) -> str:
        digest = complete_digest(prompt)
        if digest in self.complete_fixtures:
            return self.complete_fixtures[digest]
        if self.complete_default is not None:
            return self.complete_default
        raise FixtureMiss("no fixture completion for prompt")
