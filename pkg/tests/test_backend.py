"""Backend client: post-processing, mock lookups, HTTP behavior."""

import json

import numpy as np
import pytest

from conftest import wire_server
from damqa.backend import (
    BackendEndpoint,
    FixtureMiss,
    GenerationParams,
    HttpBackend,
    MockBackend,
    infer_request_body,
    is_unanswerable,
    make_prediction,
    normalize_answer,
    view_digest,
)
from damqa.errors import BackendUnavailableError, ProtocolError
from damqa.views import ImageBuffer, make_views
from damqa.wire import ServerBusy


def one_view():
    img = ImageBuffer(np.full((40, 60, 3), 7, dtype=np.uint8))
    return make_views(img, 512, 256)[0]


class TestNormalize:
    def test_strips_outer_whitespace(self):
        assert normalize_answer("  Paris\n") == "Paris"

    def test_identity(self):
        assert normalize_answer("Paris") == "Paris"

    def test_interior_preserved(self):
        assert normalize_answer("  a  b  ") == "a  b"

    def test_idempotent(self):
        for raw in ["", " x ", "\t tab\nnew \r", "a  b", "é "]:
            once = normalize_answer(raw)
            assert normalize_answer(once) == once


class TestUnanswerable:
    def test_exact_token(self):
        assert is_unanswerable("unanswerable")

    def test_case_and_trailing_period(self):
        assert is_unanswerable("Unanswerable.")

    def test_embedded_token_is_not_abstention(self):
        assert not is_unanswerable("the answer is unanswerable")

    def test_strict_mode(self):
        assert not is_unanswerable("Unanswerable.", strict=True)
        assert is_unanswerable("unanswerable", strict=True)

    def test_custom_token(self):
        assert is_unanswerable("N/A.", token="n/a")


class TestGenerationParams:
    def test_defaults_match_serving_settings(self):
        params = GenerationParams()
        assert params.temperature == pytest.approx(1e-7)
        assert params.top_p == 0.5
        assert params.num_beams == 1

    @pytest.mark.parametrize("kwargs", [
        {"temperature": -1.0}, {"top_p": 0.0}, {"top_p": 1.5},
        {"num_beams": 0}, {"max_new_tokens": 0},
    ])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            GenerationParams(**kwargs)


class TestMockBackend:
    def test_by_view_lookup(self):
        mock = MockBackend(by_view={"s1": {"0": "cat"}})
        assert mock.infer(one_view(), "p", GenerationParams(), sample_id="s1") == "cat"

    def test_miss_raises(self):
        mock = MockBackend(by_view={"s1": {"0": "cat"}})
        with pytest.raises(FixtureMiss):
            mock.infer(one_view(), "p", GenerationParams(), sample_id="s2")

    def test_default_fallback(self):
        mock = MockBackend(default="n/a")
        assert mock.infer(one_view(), "p", GenerationParams(), sample_id="s9") == "n/a"

    def test_digest_mode_reproducible(self):
        view = one_view()
        digest = view_digest(view, "prompt")
        mock = MockBackend(by_digest={digest: "42"})
        a = mock.infer(view, "prompt", GenerationParams())
        b = mock.infer(view, "prompt", GenerationParams())
        assert a == b == "42"

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "mock.json"
        path.write_text(json.dumps({"by_view": {"s": {"0": "yes"}},
                                    "default": "no",
                                    "complete_default": "ok"}))
        mock = MockBackend.from_file(path)
        assert mock.infer(one_view(), "p", GenerationParams(), sample_id="s") == "yes"
        assert mock.complete("anything", GenerationParams()) == "ok"


class TestHttpBackend:
    def test_infer_round_trip(self):
        def infer_fn(image, mask, prompt, generation):
            assert image[:8] == b"\x89PNG\r\n\x1a\n"
            assert mask[:8] == b"\x89PNG\r\n\x1a\n"
            return f"echo:{prompt}"

        with wire_server(infer_fn) as url:
            backend = HttpBackend(BackendEndpoint(base_url=url, retry_backoff=0))
            backend.probe()
            out = backend.infer(one_view(), "hello", GenerationParams())
            assert out == "echo:hello"

    def test_unreachable_no_retries(self):
        endpoint = BackendEndpoint(base_url="http://127.0.0.1:1", timeout=0.5,
                                   max_retries=0, retry_backoff=0)
        with pytest.raises(BackendUnavailableError):
            HttpBackend(endpoint).infer(one_view(), "p", GenerationParams())

    def test_retries_through_busy(self):
        state = {"calls": 0}

        def flaky(image, mask, prompt, generation):
            state["calls"] += 1
            if state["calls"] < 3:
                raise ServerBusy()
            return "finally"

        with wire_server(flaky) as url:
            backend = HttpBackend(BackendEndpoint(base_url=url, max_retries=3,
                                                  retry_backoff=0))
            assert backend.infer(one_view(), "p", GenerationParams()) == "finally"
        assert state["calls"] == 3

    def test_busy_exhausts_retries(self):
        def busy(image, mask, prompt, generation):
            raise ServerBusy()

        with wire_server(busy) as url:
            backend = HttpBackend(BackendEndpoint(base_url=url, max_retries=1,
                                                  retry_backoff=0))
            with pytest.raises(BackendUnavailableError):
                backend.infer(one_view(), "p", GenerationParams())

    def test_missing_answer_field_is_protocol_error(self):
        def infer_fn(image, mask, prompt, generation):
            return "x"

        with wire_server(infer_fn) as url:
            backend = HttpBackend(BackendEndpoint(base_url=url, retry_backoff=0))
            # /v1/complete without a complete_fn yields 404 -> ProtocolError
            with pytest.raises(ProtocolError):
                backend.complete("p", GenerationParams())

    def test_complete_round_trip(self):
        with wire_server(lambda *a: "unused",
                         complete_fn=lambda p, g: p.upper()) as url:
            backend = HttpBackend(BackendEndpoint(base_url=url, retry_backoff=0))
            assert backend.complete("verdict", GenerationParams()) == "VERDICT"


class TestRequestBody:
    def test_field_names_are_contractual(self):
        body = infer_request_body(one_view(), "q?", GenerationParams())
        assert set(body) == {"image", "mask", "prompt", "generation"}
        assert set(body["generation"]) == {"temperature", "top_p", "num_beams",
                                           "max_new_tokens"}

    def test_prediction_consistency(self):
        pred = make_prediction(3, "  Unanswerable. ")
        assert pred.view_index == 3
        assert pred.answer == "Unanswerable."
        assert pred.raw_answer == "  Unanswerable. "
        assert pred.is_unanswerable
