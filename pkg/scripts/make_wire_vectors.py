"""Regenerate protocol/wire_test_vectors.json.

The vector file is shared by the Python conformance tests and the model
server's test suite; both must pass every vector. Run from the repo root:

    python scripts/make_wire_vectors.py
"""

import base64
import json
from pathlib import Path

import numpy as np

from damqa.backend import (
    GenerationParams,
    complete_digest,
    infer_digest,
    infer_request_body,
)
from damqa.views import ImageBuffer, make_views

ROOT = Path(__file__).resolve().parent.parent


def tiny_view(value, w=24, h=16):
    img = ImageBuffer(np.full((h, w, 3), value, dtype=np.uint8))
    return make_views(img, 512, 256)[0]


def main():
    gen = GenerationParams().to_wire()

    view_a = tiny_view(10)
    body_a = infer_request_body(view_a, "what color?", GenerationParams())
    digest_a = infer_digest(base64.b64decode(body_a["image"]),
                            base64.b64decode(body_a["mask"]), body_a["prompt"])

    view_b = tiny_view(200, w=10, h=10)
    body_b = infer_request_body(view_b, "how many?", GenerationParams())
    digest_b = infer_digest(base64.b64decode(body_b["image"]),
                            base64.b64decode(body_b["mask"]), body_b["prompt"])

    judge_prompt = "grade this answer"
    fixtures = {
        "infer": {digest_a: "blue", digest_b: "3"},
        "complete": {complete_digest(judge_prompt): '{"matched": 1, "total": 1}'},
    }

    def variant(base, **changes):
        body = json.loads(json.dumps(base))
        body.update(changes)
        return body

    missing_mask = dict(body_a)
    del missing_mask["mask"]
    missing_prompt = dict(body_a)
    del missing_prompt["prompt"]
    bad_generation = json.loads(json.dumps(body_a))
    bad_generation["generation"]["temperature"] = "hot"
    no_gen_field = json.loads(json.dumps(body_a))
    del no_gen_field["generation"]["top_p"]

    vectors = [
        {"name": "infer fixture hit", "path": "/v1/infer", "body": body_a,
         "expect": {"status": 200, "equals": {"answer": "blue"}}},
        {"name": "infer second fixture hit", "path": "/v1/infer", "body": body_b,
         "expect": {"status": 200, "equals": {"answer": "3"}}},
        {"name": "infer unknown digest", "path": "/v1/infer",
         "body": variant(body_a, prompt="never seen before"),
         "expect": {"status": 404, "has": ["error"]}},
        {"name": "infer missing mask", "path": "/v1/infer", "body": missing_mask,
         "expect": {"status": 400, "has": ["error"]}},
        {"name": "infer missing prompt", "path": "/v1/infer", "body": missing_prompt,
         "expect": {"status": 400, "has": ["error"]}},
        {"name": "infer image not base64", "path": "/v1/infer",
         "body": variant(body_a, image="%%%"),
         "expect": {"status": 400, "has": ["error"]}},
        {"name": "infer image not a png", "path": "/v1/infer",
         "body": variant(body_a,
                         image=base64.b64encode(b"GIF89a not a png").decode()),
         "expect": {"status": 400, "has": ["error"]}},
        {"name": "infer generation wrong type", "path": "/v1/infer",
         "body": bad_generation, "expect": {"status": 400, "has": ["error"]}},
        {"name": "infer generation missing field", "path": "/v1/infer",
         "body": no_gen_field, "expect": {"status": 400, "has": ["error"]}},
        {"name": "infer body not json", "path": "/v1/infer",
         "raw_body": "{this is not json",
         "expect": {"status": 400, "has": ["error"]}},
        {"name": "complete fixture hit", "path": "/v1/complete",
         "body": {"prompt": judge_prompt, "generation": gen},
         "expect": {"status": 200,
                    "equals": {"text": '{"matched": 1, "total": 1}'}}},
        {"name": "complete missing prompt", "path": "/v1/complete",
         "body": {"generation": gen},
         "expect": {"status": 400, "has": ["error"]}},
        {"name": "complete unknown digest", "path": "/v1/complete",
         "body": {"prompt": "nothing stored", "generation": gen},
         "expect": {"status": 404, "has": ["error"]}},
        {"name": "unknown path", "path": "/v2/other", "body": body_a,
         "expect": {"status": 404, "has": ["error"]}},
    ]

    out = ROOT / "protocol" / "wire_test_vectors.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps({"fixtures": fixtures, "vectors": vectors},
                              indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(vectors)} vectors to {out}")


if __name__ == "__main__":
    main()
