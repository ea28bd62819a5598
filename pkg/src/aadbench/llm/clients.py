"""LLM clients, retrying generation and the query log.

Query log: one JSON object per line with ``timestamp``, ``model``,
``request_hash``, ``attempt``, ``messages``, ``response``, ``prompt_tokens``,
``completion_tokens``, ``cost``, ``latency``, ``temperature``, ``seed``,
``outcome`` (``ok`` / ``transient_error`` / ``error``) and ``error``.
Credentials are never written.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import httpx


class LlmError(RuntimeError):
    """A query that could not be answered."""


class TransientLlmError(LlmError):
    """A failure worth retrying (transport error, 5xx, 429)."""


@dataclass(frozen=True)
class LlmRequest:
    messages: tuple[dict, ...]
    model: str = "mock"
    temperature: float = 0.8
    seed: int | None = None

    @classmethod
    def from_prompt(cls, prompt: str, **kwargs) -> "LlmRequest":
        return cls(({"role": "user", "content": prompt},), **kwargs)

    @property
    def text(self) -> str:
        return "\n".join(m["content"] for m in self.messages)

    def digest(self) -> str:
        body = json.dumps([self.model, list(self.messages), self.temperature, self.seed], sort_keys=True)
        return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass
class LlmResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    latency: float = 0.0
    cost: float = 0.0


def word_count(text: str) -> int:
    return len(text.split())


class QueryLogger:
    """Append-only query log; ``path=None`` keeps records in memory only."""

    def __init__(self, path=None):
        self.path = path
        self.records: list[dict] = []
        self._lock = threading.Lock()
        if path is not None:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    def log(self, record: dict) -> None:
        with self._lock:
            self.records.append(record)
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")

    def total_tokens(self) -> int:
        return sum((r.get("prompt_tokens") or 0) + (r.get("completion_tokens") or 0) for r in self.records)


class RateLimiter:
    """Token bucket: at most ``per_minute`` acquisitions per rolling minute on average."""

    def __init__(self, per_minute: float, clock=time.monotonic, sleep=time.sleep):
        self.rate = per_minute / 60.0
        self.capacity = max(1.0, per_minute / 60.0)
        self.tokens = self.capacity
        self.clock, self.sleep = clock, sleep
        self.last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            self.tokens = min(self.capacity, self.tokens + (now - self.last) * self.rate)
            self.last = now
            if self.tokens < 1.0:
                wait = (1.0 - self.tokens) / self.rate
                self.sleep(wait)
                self.last = self.clock()
                self.tokens = 0.0
            else:
                self.tokens -= 1.0


_LIMITERS: dict[str, RateLimiter] = {}
_LIMITERS_LOCK = threading.Lock()


def shared_limiter(endpoint: str, per_minute: float) -> RateLimiter:
    with _LIMITERS_LOCK:
        if endpoint not in _LIMITERS:
            _LIMITERS[endpoint] = RateLimiter(per_minute)
        return _LIMITERS[endpoint]


@dataclass
class OpenAIChatClient:
    """Client for OpenAI-style ``/chat/completions`` endpoints.

    The API key is read from the environment variable named by
    ``api_key_env``; the base URL may be overridden with ``AADBENCH_LLM_BASE_URL``.
    """

    model: str
    base_url: str | None = None
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.8
    price_in: float = 0.0
    price_out: float = 0.0
    timeout: float = 120.0
    requests_per_minute: float | None = None
    transport: httpx.BaseTransport | None = field(default=None, repr=False)

    def __post_init__(self):
        self.base_url = (self.base_url or os.environ.get("AADBENCH_LLM_BASE_URL")
                         or "https://api.openai.com/v1").rstrip("/")
        self._limiter = (shared_limiter(self.base_url, self.requests_per_minute)
                         if self.requests_per_minute else None)

    def complete(self, request: LlmRequest) -> LlmResponse:
        if self._limiter is not None:
            self._limiter.acquire()
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {"model": request.model or self.model, "messages": list(request.messages),
                "temperature": request.temperature}
        if request.seed is not None:
            body["seed"] = request.seed
        start = time.monotonic()
        try:
            with httpx.Client(transport=self.transport, timeout=self.timeout) as http:
                resp = http.post(f"{self.base_url}/chat/completions", json=body, headers=headers)
        except httpx.TransportError as exc:
            raise TransientLlmError(f"transport error: {exc}") from exc
        latency = time.monotonic() - start
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientLlmError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise LlmError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise LlmError(f"unexpected response body: {exc}") from exc
        usage = data.get("usage") or {}
        p_tok = int(usage.get("prompt_tokens", word_count(request.text)))
        c_tok = int(usage.get("completion_tokens", word_count(text)))
        return LlmResponse(text, p_tok, c_tok, latency, p_tok * self.price_in + c_tok * self.price_out)


def generate(client, request: LlmRequest, logger: QueryLogger | None = None, retries: int = 3,
             backoff: float = 1.0, sleep=time.sleep) -> LlmResponse:
    """Query ``client`` with up to ``retries`` retries on transient failures.

    Every attempt is logged before its outcome is acted on.
    """
    attempt = 0
    while True:
        attempt += 1
        record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "model": request.model, "request_hash": request.digest(), "attempt": attempt,
            "messages": list(request.messages), "temperature": request.temperature,
            "seed": request.seed, "response": None, "prompt_tokens": None,
            "completion_tokens": None, "cost": None, "latency": None, "error": None,
        }
        try:
            response = client.complete(request)
        except TransientLlmError as exc:
            record.update(outcome="transient_error", error=str(exc))
            if logger is not None:
                logger.log(record)
            if attempt > retries:
                raise LlmError(f"gave up after {attempt} attempts: {exc}") from exc
            sleep(backoff * 2 ** (attempt - 1))
            continue
        except LlmError as exc:
            record.update(outcome="error", error=str(exc))
            if logger is not None:
                logger.log(record)
            raise
        record.update(outcome="ok", response=response.text, prompt_tokens=response.prompt_tokens,
                      completion_tokens=response.completion_tokens, cost=response.cost,
                      latency=response.latency)
        if logger is not None:
            logger.log(record)
        return response
