"""Completion backends: an HTTP text-completion client and an in-process mock.

Wire shape (request → response)::

    POST {endpoint}
    {"model": ..., "prompt": ..., "temperature": 0, "max_tokens": N}
    → {"choices": [{"text": "...", "finish_reason": "stop" | "length"}]}
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol

import httpx

from ..errors import BackendUnavailable, BudgetExhausted, ConfigError, EmptyCompletion
from .prompt import PromptRecord

log = logging.getLogger(__name__)

MOCK = "mock"


def snippet_key(wat_snippet: str) -> str:
    return hashlib.sha256(wat_snippet.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str = MOCK
    model: str = "wat2c"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 60.0
    retries: int = 3
    max_in_flight: int = 4
    api_key: str | None = None
    mock_table: str | None = None
    backoff: float = 0.5

    def __post_init__(self) -> None:
        if self.retries < 0 or self.max_in_flight < 1 or self.max_tokens < 1:
            raise ConfigError("retries >= 0, max_in_flight >= 1 and max_tokens >= 1 required")

    @property
    def is_mock(self) -> bool:
        return self.endpoint == MOCK


class Backend(Protocol):
    def complete(self, prompt: PromptRecord) -> str: ...


class MockBackend:
    """Looks completions up by the sha256 of the wat snippet text."""

    def __init__(self, table: Mapping[str, str]):
        self.table = dict(table)

    @classmethod
    def from_file(cls, path: str | Path) -> MockBackend:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: mock table must be a JSON object of sha256 → completion")
        return cls(data)

    def complete(self, prompt: PromptRecord) -> str:
        try:
            return self.table[snippet_key(prompt.wat_snippet)]
        except KeyError:
            raise EmptyCompletion("mock table has no entry for this snippet", prompt.block_id) from None


class HttpBackend:
    def __init__(self, cfg: BackendConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        headers = {"Authorization": f"Bearer {cfg.api_key}"} if cfg.api_key else {}
        self._client = httpx.Client(timeout=cfg.timeout, headers=headers, transport=transport)
        self._slots = threading.BoundedSemaphore(cfg.max_in_flight)

    def close(self) -> None:
        self._client.close()

    def _post(self, payload: dict, block_id: str) -> dict:
        last: Exception | None = None
        for attempt in range(self.cfg.retries + 1):
            if attempt:
                time.sleep(self.cfg.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self._client.post(self.cfg.endpoint, json=payload)
            except httpx.HTTPError as exc:
                last = exc
                log.warning("%s: attempt %d failed: %s", block_id, attempt + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = RuntimeError(f"HTTP {resp.status_code}")
                log.warning("%s: attempt %d got HTTP %d", block_id, attempt + 1, resp.status_code)
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}", block_id)
            try:
                return resp.json()
            except ValueError:
                raise BackendUnavailable("response is not JSON", block_id) from None
        raise BackendUnavailable(f"gave up after {self.cfg.retries + 1} attempts: {last}", block_id)

    def complete(self, prompt: PromptRecord) -> str:
        payload = {
            "model": self.cfg.model,
            "prompt": prompt.render(),
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        }
        body = self._post(payload, prompt.block_id)
        try:
            choice = body["choices"][0]
            text = choice.get("text") or ""
        except (KeyError, IndexError, TypeError, AttributeError):
            raise BackendUnavailable("malformed completion response", prompt.block_id) from None
        if choice.get("finish_reason") == "length":
            raise BudgetExhausted(f"completion hit max_tokens={self.cfg.max_tokens}", prompt.block_id)
        return text


def make_backend(cfg: BackendConfig) -> Backend:
    if cfg.is_mock:
        if cfg.mock_table is None:
            raise ConfigError("mock backend needs a mock_table file")
        return MockBackend.from_file(cfg.mock_table)
    return HttpBackend(cfg)
