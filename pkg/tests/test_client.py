import json
import threading
import time

import pytest
import requests

from travelsat.client import (
    API_KEY_ENV,
    HttpChatBackend,
    LlmClient,
    LlmParams,
    LlmResponse,
    ResponseCache,
    RetryPolicy,
    cache_key,
)
from travelsat.errors import (
    CredentialError,
    TransientTransportError,
    TransportError,
)
from travelsat.prompting import Prompt

PROMPT = Prompt(system_text="score travelers", user_text="Traveler q1")
PARAMS = LlmParams()


class FakeBackend:
    """Scriptable backend: pops one planned outcome per call."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = 0

    def complete(self, prompt, params):
        self.calls += 1
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def test_params_validation():
    with pytest.raises(ValueError):
        LlmParams(temperature=2.5)
    with pytest.raises(ValueError):
        LlmParams(request_timeout=0.0)
    with pytest.raises(ValueError):
        LlmParams(max_output_tokens=0)
    assert PARAMS.temperature == 0.7
    assert PARAMS.model_name == "deepseek-reasoner"


def test_retry_policy_backoff():
    policy = RetryPolicy(max_attempts=5, base_delay=1.0, max_delay=30.0)
    assert [policy.delay(a) for a in range(6)] == [1.0, 2.0, 4.0, 8.0, 16.0, 30.0]


def test_retries_then_succeeds():
    backend = FakeBackend([
        TransientTransportError("HTTP 429"),
        TransientTransportError("HTTP 503"),
        LlmResponse(content="ok"),
    ])
    delays = []
    client = LlmClient(backend, PARAMS, retry=RetryPolicy(max_attempts=4),
                       sleep=delays.append)
    assert client.complete(PROMPT).content == "ok"
    assert backend.calls == 3
    assert delays == [1.0, 2.0]


def test_gives_up_after_max_attempts():
    backend = FakeBackend([TransientTransportError("down")] * 3)
    client = LlmClient(backend, PARAMS, retry=RetryPolicy(max_attempts=3),
                       sleep=lambda _: None)
    with pytest.raises(TransportError) as excinfo:
        client.complete(PROMPT)
    assert "3 attempts" in str(excinfo.value)
    assert backend.calls == 3


def test_credential_errors_are_not_retried():
    backend = FakeBackend([CredentialError("bad key")])
    client = LlmClient(backend, PARAMS, sleep=lambda _: None)
    with pytest.raises(CredentialError):
        client.complete(PROMPT)
    assert backend.calls == 1


def test_hard_transport_errors_are_not_retried():
    backend = FakeBackend([TransportError("HTTP 400")])
    client = LlmClient(backend, PARAMS, sleep=lambda _: None)
    with pytest.raises(TransportError):
        client.complete(PROMPT)
    assert backend.calls == 1


def test_cache_round_trip(tmp_path):
    cache = ResponseCache(tmp_path / "cache")
    key = cache_key(PARAMS, PROMPT, 0)
    assert cache.get(key) is None
    cache.put(key, LlmResponse(content="body", reasoning="why"))
    hit = cache.get(key)
    assert hit == LlmResponse(content="body", reasoning="why")


def test_cache_corrupt_entry_is_a_miss(tmp_path):
    cache = ResponseCache(tmp_path)
    key = cache_key(PARAMS, PROMPT, 0)
    (tmp_path / f"{key}.json").write_text("{not json", encoding="utf-8")
    assert cache.get(key) is None


def test_cache_directory_is_relocatable(tmp_path):
    cache = ResponseCache(tmp_path / "a")
    key = cache_key(PARAMS, PROMPT, 2)
    cache.put(key, LlmResponse(content="kept"))
    (tmp_path / "a").rename(tmp_path / "b")
    moved = ResponseCache(tmp_path / "b")
    assert moved.get(key).content == "kept"


def test_cache_files_hold_no_credentials(tmp_path, monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sk-secret-123")
    cache = ResponseCache(tmp_path)
    key = cache_key(PARAMS, PROMPT, 0)
    cache.put(key, LlmResponse(content="score block"))
    stored = (tmp_path / f"{key}.json").read_text("utf-8")
    assert "sk-secret-123" not in stored
    assert set(json.loads(stored)) == {"content", "reasoning"}


def test_cached_complete_uses_cache(tmp_path):
    backend = FakeBackend([LlmResponse(content="first")])
    client = LlmClient(backend, PARAMS, cache_dir=tmp_path)
    first = client.cached_complete(PROMPT, trial_index=0)
    second = client.cached_complete(PROMPT, trial_index=0)
    assert first == second
    assert backend.calls == 1
    assert client.cache_misses == 1 and client.cache_hits == 1


def test_trial_index_separates_cache_slots(tmp_path):
    backend = FakeBackend([LlmResponse(content="a"), LlmResponse(content="b")])
    client = LlmClient(backend, PARAMS, cache_dir=tmp_path)
    assert client.cached_complete(PROMPT, trial_index=0).content == "a"
    assert client.cached_complete(PROMPT, trial_index=1).content == "b"
    assert backend.calls == 2


def test_cache_key_sensitivity():
    base = cache_key(PARAMS, PROMPT, 0)
    assert cache_key(PARAMS, PROMPT, 1) != base
    other_prompt = Prompt(system_text="score travelers", user_text="Traveler q2")
    assert cache_key(PARAMS, other_prompt, 0) != base
    other_model = LlmParams(model_name="deepseek-chat")
    assert cache_key(other_model, PROMPT, 0) != base
    warmer = LlmParams(temperature=0.8)
    assert cache_key(warmer, PROMPT, 0) != base
    # split point between system and user text matters
    shifted = Prompt(system_text="score travelers ", user_text="Traveler q1")
    assert cache_key(PARAMS, shifted, 0) != base


class EchoBackend:
    def complete(self, prompt, params):
        return LlmResponse(content=prompt.user_text)


def test_complete_many_preserves_order(tmp_path):
    client = LlmClient(EchoBackend(), PARAMS, cache_dir=tmp_path, max_in_flight=3)
    prompts = [Prompt(system_text="s", user_text=f"u{i}") for i in range(7)]
    out = client.complete_many([(p, 0) for p in prompts])
    assert [r.content for r in out] == [f"u{i}" for i in range(7)]
    assert client.cache_misses == 7
    # a second pass is served entirely from cache, in the same order
    again = client.complete_many([(p, 0) for p in prompts])
    assert [r.content for r in again] == [f"u{i}" for i in range(7)]
    assert client.cache_hits == 7


def test_complete_many_respects_in_flight_cap():
    lock = threading.Lock()
    state = {"active": 0, "peak": 0}

    class SlowBackend:
        def complete(self, prompt, params):
            with lock:
                state["active"] += 1
                state["peak"] = max(state["peak"], state["active"])
            time.sleep(0.02)
            with lock:
                state["active"] -= 1
            return LlmResponse(content=prompt.user_text)

    client = LlmClient(SlowBackend(), PARAMS, max_in_flight=2)
    prompts = [Prompt(system_text="s", user_text=f"u{i}") for i in range(8)]
    out = client.complete_many([(p, 0) for p in prompts])
    assert [r.content for r in out] == [f"u{i}" for i in range(8)]
    assert state["peak"] <= 2


def test_max_in_flight_validated():
    with pytest.raises(ValueError):
        LlmClient(FakeBackend([]), PARAMS, max_in_flight=0)


class _FakeHttpResponse:
    def __init__(self, status_code, body=None, text=""):
        self.status_code = status_code
        self._body = body
        self.text = text

    def json(self):
        if self._body is None:
            raise ValueError("no body")
        return self._body


def _patch_post(monkeypatch, handler):
    captured = {}

    def fake_post(url, json=None, headers=None, timeout=None):
        captured.update(url=url, payload=json, headers=headers, timeout=timeout)
        result = handler()
        if isinstance(result, Exception):
            raise result
        return result

    monkeypatch.setattr(requests, "post", fake_post)
    return captured


def test_http_backend_success(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    body = {"choices": [{"message": {"content": "scores here",
                                     "reasoning_content": "thinking"}}]}
    captured = _patch_post(monkeypatch, lambda: _FakeHttpResponse(200, body))
    response = HttpChatBackend().complete(PROMPT, PARAMS)
    assert response == LlmResponse(content="scores here", reasoning="thinking")
    assert captured["url"] == "https://api.deepseek.com/v1/chat/completions"
    assert captured["headers"]["Authorization"] == "Bearer sk-test"
    assert captured["payload"]["model"] == "deepseek-reasoner"
    assert captured["payload"]["temperature"] == 0.7
    assert captured["payload"]["messages"][0]["role"] == "system"
    assert captured["payload"]["messages"][1]["content"] == PROMPT.user_text
    assert captured["timeout"] == 120.0


def test_http_backend_fallback_key(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    monkeypatch.setenv("DEEPSEEK_API_KEY", "sk-fallback")
    body = {"choices": [{"message": {"content": "ok"}}]}
    captured = _patch_post(monkeypatch, lambda: _FakeHttpResponse(200, body))
    HttpChatBackend().complete(PROMPT, PARAMS)
    assert captured["headers"]["Authorization"] == "Bearer sk-fallback"


def test_http_backend_missing_key(monkeypatch):
    for env in (API_KEY_ENV, "DEEPSEEK_API_KEY", "OPENAI_API_KEY"):
        monkeypatch.delenv(env, raising=False)
    called = _patch_post(monkeypatch, lambda: _FakeHttpResponse(200, {}))
    with pytest.raises(CredentialError) as excinfo:
        HttpChatBackend().complete(PROMPT, PARAMS)
    assert API_KEY_ENV in str(excinfo.value)
    assert "url" not in called  # no request went out without a key


@pytest.mark.parametrize("status,expected", [
    (401, CredentialError),
    (403, CredentialError),
    (429, TransientTransportError),
    (500, TransientTransportError),
    (503, TransientTransportError),
    (400, TransportError),
])
def test_http_backend_status_routing(monkeypatch, status, expected):
    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    _patch_post(monkeypatch, lambda: _FakeHttpResponse(status, text="nope"))
    with pytest.raises(expected):
        HttpChatBackend().complete(PROMPT, PARAMS)


def test_http_backend_timeout_is_transient(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    _patch_post(monkeypatch, lambda: requests.Timeout("deadline"))
    with pytest.raises(TransientTransportError):
        HttpChatBackend().complete(PROMPT, PARAMS)


def test_http_backend_malformed_body(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    _patch_post(monkeypatch, lambda: _FakeHttpResponse(200, {"choices": []}))
    with pytest.raises(TransportError):
        HttpChatBackend().complete(PROMPT, PARAMS)
