"""Server-side semantics of the wire protocol.

The backend module documents the schema; this module implements the
request-validation and dispatch rules a conforming server must follow, so
the shared protocol test vectors can run against any handler built on it.
Status codes: 200 ok, 400 malformed request, 404 unknown route or fixture
miss, 503 busy (retryable).
"""

from __future__ import annotations

import base64
import binascii
import json
from typing import Callable, Optional, Union

from damqa.backend import FixtureMiss

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_GENERATION_FIELDS = {
    "temperature": (int, float),
    "top_p": (int, float),
    "num_beams": int,
    "max_new_tokens": int,
}


class ServerBusy(Exception):
    """Raised by handlers when the request queue is full."""


def decode_png_field(value: object, field: str) -> bytes:
    """Decode a base64 PNG request field, validating the PNG signature."""
    if not isinstance(value, str):
        raise ValueError(f'"{field}" must be a base64 string')
    try:
        raw = base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValueError(f'"{field}" is not valid base64') from exc
    if not raw.startswith(PNG_SIGNATURE):
        raise ValueError(f'"{field}" is not a PNG')
    return raw


def validate_generation(value: object) -> None:
    if not isinstance(value, dict):
        raise ValueError('"generation" must be an object')
    for field, types in _GENERATION_FIELDS.items():
        if field not in value:
            raise ValueError(f'"generation.{field}" is required')
        if not isinstance(value[field], types) or isinstance(value[field], bool):
            raise ValueError(f'"generation.{field}" has the wrong type')


def parse_infer_request(body: dict) -> tuple[bytes, bytes, str, dict]:
    """Validate an /v1/infer body; returns (image, mask, prompt, generation)."""
    for field in ("image", "mask", "prompt", "generation"):
        if field not in body:
            raise ValueError(f'"{field}" is required')
    image = decode_png_field(body["image"], "image")
    mask = decode_png_field(body["mask"], "mask")
    if not isinstance(body["prompt"], str) or not body["prompt"]:
        raise ValueError('"prompt" must be a non-empty string')
    validate_generation(body["generation"])
    return image, mask, body["prompt"], body["generation"]


def parse_complete_request(body: dict) -> tuple[str, dict]:
    """Validate a /v1/complete body; returns (prompt, generation)."""
    for field in ("prompt", "generation"):
        if field not in body:
            raise ValueError(f'"{field}" is required')
    if not isinstance(body["prompt"], str) or not body["prompt"]:
        raise ValueError('"prompt" must be a non-empty string')
    validate_generation(body["generation"])
    return body["prompt"], body["generation"]


InferFn = Callable[[bytes, bytes, str, dict], str]
CompleteFn = Callable[[str, dict], str]


def handle_request(path: str, body: Union[dict, str, bytes, None],
                   infer_fn: InferFn,
                   complete_fn: Optional[CompleteFn] = None) -> tuple[int, dict]:
    """Route one request through protocol validation to a handler.

    ``body`` may be a parsed dict or raw JSON text. Returns (status, payload).
    """
    if path not in ("/v1/infer", "/v1/complete"):
        return 404, {"error": f"unknown path {path}"}
    if not isinstance(body, dict):
        try:
            body = json.loads(body if body is not None else "")
        except (TypeError, ValueError):
            return 400, {"error": "request body is not valid JSON"}
        if not isinstance(body, dict):
            return 400, {"error": "request body must be a JSON object"}

    try:
        if path == "/v1/infer":
            image, mask, prompt, generation = parse_infer_request(body)
            answer = infer_fn(image, mask, prompt, generation)
            return 200, {"answer": answer}
        if complete_fn is None:
            return 404, {"error": "completion not supported"}
        prompt, generation = parse_complete_request(body)
        return 200, {"text": complete_fn(prompt, generation)}
    except ValueError as exc:
        return 400, {"error": str(exc)}
    except FixtureMiss as exc:
        return 404, {"error": str(exc)}
    except ServerBusy:
        return 503, {"error": "busy"}
