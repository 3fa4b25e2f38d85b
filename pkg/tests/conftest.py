"""Shared test fixtures: synthetic images, a 10-sample dataset with
scripted mock answers, and a minimal wire-protocol test server."""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from damqa.wire import handle_request

UNANS = "unanswerable"


def write_test_image(path: Path, w: int, h: int, k: int) -> None:
    """Deterministic aperiodic pattern; no RNG so reruns are byte-identical.

    The quadratic terms keep crops at different offsets from being
    pixel-identical, so content-digest fixtures stay collision-free.
    """
    y, x = np.mgrid[0:h, 0:w]
    data = np.stack(
        [(x * x // 7 + y * y // 5 + x * 3 + y * 5 + c * 11 + k * 17) % 256
         for c in range(3)],
        axis=-1).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


# Per sample: image size, question, canonical answers, full-view answer,
# patch answers by patch index (1-based; "*" is the default for the rest),
# and the hand-computed expected final answer under the default vote config.
FIXTURE_SAMPLES = [
    {"id": "s01", "size": (1400, 900), "question": "what animal is shown?",
     "answers": ["dog"], "full": "cat",
     "patches": {1: "dog", 2: "dog", 3: "dog", 4: "dog", 5: "cat", 6: UNANS},
     "expected_final": "dog", "expected_patches": 6},
    # K=1: the single patch is the whole image, so a deterministic model
    # necessarily answers it identically to the full view.
    {"id": "s02", "size": (2400, 600), "question": "how many items?",
     "answers": ["7"], "full": "7", "patches": {"*": "7"},
     "expected_final": "7", "expected_patches": 1},
    {"id": "s03", "size": (640, 480), "question": "what is the total?",
     "answers": [UNANS], "question_type": "Unanswerable",
     "full": UNANS, "patches": {1: "Unanswerable.", "*": UNANS},
     "expected_final": UNANS, "expected_patches": 6},
    {"id": "s04", "size": (1024, 1024), "question": "which label?",
     "answers": ["x"], "full": "x",
     "patches": {1: "y", 2: "y", 3: "y", 4: "y", "*": UNANS},
     "expected_final": "x", "expected_patches": 9},
    {"id": "s05", "size": (500, 250), "question": "which city?",
     "answers": ["Paris"], "full": "Paris",
     "patches": {1: " Paris\n", 2: "Paris", 3: "paris "},
     "expected_final": "Paris", "expected_patches": 3},
    {"id": "s06", "size": (1024, 1024), "question": "what word is largest?",
     "answers": ["w"], "full": "w", "patches": {1: "z", 2: "z", "*": UNANS},
     "expected_final": "w", "expected_patches": 9},
    {"id": "s07", "size": (1024, 768), "question": "what is the page number?",
     "answers": ["42"], "full": "42", "patches": {"*": "42"},
     "expected_final": "42", "expected_patches": 6},
    {"id": "s08", "size": (1024, 1024), "question": "which quarter peaked?",
     "answers": ["q"], "full": UNANS, "patches": {1: "q", "*": UNANS},
     "expected_final": "q", "expected_patches": 9},
    {"id": "s09", "size": (900, 900), "question": "name of the shop?",
     "answers": ["café"], "full": "café",
     "patches": {1: "café", 2: "café", 3: "café", 4: "cafe", 5: "cafe",
                 "*": UNANS},
     "expected_final": "café", "expected_patches": 9},
    {"id": "s10", "size": (1300, 1300), "question": "what time does it open?",
     "answers": ["4 pm"], "full": UNANS,
     "patches": {1: "4 pm", 2: "4 pm", 3: "4 pm", 4: "4 pm", 5: "4 pm",
                 "*": "4pm"},
     "expected_final": "4 pm", "expected_patches": 9},
    # every patch abstains but the full view answers: fallback fires
    {"id": "s11", "size": (640, 480), "question": "who is the author?",
     "answers": ["cat"], "full": "cat", "patches": {"*": UNANS},
     "expected_final": "cat", "expected_patches": 6},
]


def build_fixture_dataset(root: Path) -> dict:
    """Create images, canonical dataset, and by-view mock answers in root."""
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    dataset_path = root / "dataset.jsonl"
    mock_path = root / "mock.json"

    by_view: dict = {}
    with open(dataset_path, "w", encoding="utf-8") as fh:
        for k, spec in enumerate(FIXTURE_SAMPLES):
            w, h = spec["size"]
            write_test_image(images / f"{spec['id']}.png", w, h, k)
            fh.write(json.dumps({
                "id": spec["id"],
                "image": f"{spec['id']}.png",
                "question": spec["question"],
                "answers": spec["answers"],
                "question_type": spec.get("question_type"),
                "answer_kind": spec.get("answer_kind"),
                "dataset": "fixture",
            }, ensure_ascii=False) + "\n")
            answers = {"0": spec["full"]}
            default = spec["patches"].get("*", UNANS)
            for i in range(1, spec["expected_patches"] + 1):
                answers[str(i)] = spec["patches"].get(i, default)
            by_view[spec["id"]] = answers

    mock_path.write_text(json.dumps({"by_view": by_view}, ensure_ascii=False,
                                    indent=2), encoding="utf-8")
    return {"dataset": dataset_path, "images": images, "mock": mock_path}


@pytest.fixture
def fixture_dataset(tmp_path):
    return build_fixture_dataset(tmp_path)


class _WireHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length).decode("utf-8")
        status, payload = handle_request(self.path, raw,
                                         self.server.infer_fn,
                                         self.server.complete_fn)
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass


@contextmanager
def wire_server(infer_fn, complete_fn=None):
    """Serve the wire protocol around the given handlers; yields a base URL."""
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), _WireHandler)
    httpd.infer_fn = infer_fn
    httpd.complete_fn = complete_fn
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{httpd.server_port}"
    finally:
        httpd.shutdown()
        thread.join(timeout=5)
