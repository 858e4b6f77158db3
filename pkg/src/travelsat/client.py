"""LLM transport: HTTP backend, retries, response cache, concurrency cap.

The HTTP backend speaks the common chat-completions JSON shape. API keys
come from the environment only (TRAVELSAT_API_KEY, falling back to
DEEPSEEK_API_KEY); they are never read from config files and never written
to the cache. Cached responses are content-addressed by a digest of
(model, temperature, prompt bytes, trial index), one JSON file per digest,
so a cache directory can be renamed or copied freely.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

from .errors import CredentialError, TransientTransportError, TransportError
from .prompting import Prompt

logger = logging.getLogger(__name__)

API_KEY_ENV = "TRAVELSAT_API_KEY"
_FALLBACK_KEY_ENVS = ("DEEPSEEK_API_KEY", "OPENAI_API_KEY")


@dataclass(frozen=True)
class LlmParams:
    model_name: str = "deepseek-reasoner"
    temperature: float = 0.7
    max_output_tokens: int = 8192
    endpoint: str = "https://api.deepseek.com/v1"
    request_timeout: float = 120.0

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be positive")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class LlmResponse:
    content: str
    # separate reasoning channel, when the provider exposes one
    reasoning: str = ""


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    base_delay: float = 1.0
    max_delay: float = 30.0

    def delay(self, attempt: int) -> float:
        return min(self.max_delay, self.base_delay * (2 ** attempt))


class Backend(Protocol):
    def complete(self, prompt: Prompt, params: LlmParams) -> LlmResponse: ...


def _api_key() -> str:
    for env in (API_KEY_ENV, *_FALLBACK_KEY_ENVS):
        key = os.environ.get(env)
        if key:
            return key
    raise CredentialError(
        f"no API key found; set {API_KEY_ENV} in the environment"
    )


class HttpChatBackend:
    """Chat-completions POST transport over requests."""

    def complete(self, prompt: Prompt, params: LlmParams) -> LlmResponse:
        url = params.endpoint.rstrip("/") + "/chat/completions"
        payload = {
            "model": params.model_name,
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        }
        headers = {"Authorization": f"Bearer {_api_key()}"}
        try:
            response = requests.post(url, json=payload, headers=headers,
                                     timeout=params.request_timeout)
        except (requests.Timeout, requests.ConnectionError) as exc:
            raise TransientTransportError(f"transport failure: {exc}") from exc
        if response.status_code in (401, 403):
            raise CredentialError(f"API rejected credentials ({response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientTransportError(f"HTTP {response.status_code}")
        if response.status_code != 200:
            raise TransportError(f"HTTP {response.status_code}: {response.text[:500]}")
        try:
            body = response.json()
            message = body["choices"][0]["message"]
            content = message["content"] or ""
            reasoning = message.get("reasoning_content") or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed API response: {exc}") from exc
        return LlmResponse(content=content, reasoning=reasoning)


def cache_key(params: LlmParams, prompt: Prompt, trial_index: int) -> str:
    """Digest identifying one (model, temperature, prompt, trial) request."""
    h = hashlib.sha256()
    h.update(params.model_name.encode("utf-8"))
    h.update(b"\x00")
    h.update(repr(params.temperature).encode("ascii"))
    h.update(b"\x00")
    h.update(prompt.as_bytes())
    h.update(b"\x00")
    h.update(str(trial_index).encode("ascii"))
    return h.hexdigest()


class ResponseCache:
    """One JSON file per request digest, written atomically."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> LlmResponse | None:
        path = self._path(key)
        try:
            body = json.loads(path.read_text("utf-8"))
            return LlmResponse(content=body["content"],
                               reasoning=body.get("reasoning", ""))
        except FileNotFoundError:
            return None
        except (ValueError, KeyError, TypeError):
            # unreadable entry: treat as a miss, refetch will overwrite it
            logger.warning("discarding corrupted cache entry %s", path.name)
            return None

    def put(self, key: str, response: LlmResponse) -> None:
        payload = json.dumps(
            {"content": response.content, "reasoning": response.reasoning},
            ensure_ascii=False,
        )
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


class LlmClient:
    """Retrying, caching, concurrency-bounded front end over a backend."""

    def __init__(self, backend: Backend, params: LlmParams,
                 cache_dir=None, retry: RetryPolicy | None = None,
                 max_in_flight: int = 4,
                 sleep: Callable[[float], None] = time.sleep):
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")
        self.backend = backend
        self.params = params
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        self.retry = retry or RetryPolicy()
        self.max_in_flight = max_in_flight
        self._sleep = sleep
        self.transport_calls = 0
        self.cache_hits = 0
        self.cache_misses = 0

    def complete(self, prompt: Prompt) -> LlmResponse:
        """One completion with retries on transient transport failures."""
        last: Exception | None = None
        for attempt in range(self.retry.max_attempts):
            try:
                self.transport_calls += 1
                return self.backend.complete(prompt, self.params)
            except TransientTransportError as exc:
                last = exc
                if attempt + 1 < self.retry.max_attempts:
                    delay = self.retry.delay(attempt)
                    logger.warning("transient failure (%s), retrying in %.1fs", exc, delay)
                    self._sleep(delay)
        raise TransportError(
            f"gave up after {self.retry.max_attempts} attempts: {last}"
        ) from last

    def cached_complete(self, prompt: Prompt, trial_index: int) -> LlmResponse:
        if self.cache is None:
            return self.complete(prompt)
        key = cache_key(self.params, prompt, trial_index)
        hit = self.cache.get(key)
        if hit is not None:
            self.cache_hits += 1
            return hit
        self.cache_misses += 1
        response = self.complete(prompt)
        self.cache.put(key, response)
        return response

    def complete_many(self, jobs: Sequence[tuple[Prompt, int]]) -> list[LlmResponse]:
        """Run (prompt, trial_index) jobs concurrently, preserving order.

        At most max_in_flight requests are in flight at a time.
        """
        if not jobs:
            return []
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            futures = [pool.submit(self.cached_complete, prompt, trial)
                       for prompt, trial in jobs]
            return [f.result() for f in futures]
