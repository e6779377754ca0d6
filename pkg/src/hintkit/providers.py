"""Completion providers: a chat-completion HTTP client and a scripted mock.

Every provider call carries a scenario ``tag`` ("repair", "optimize",
"hint:planning", ...) and a zero-based ``attempt`` index. The remote client
ignores both; the mock uses them to pick canned responses, which keeps a
whole generation run a pure function of its inputs.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol

import httpx

from .errors import ConfigError, ProviderError

MOCK_PROVIDER = "deterministic-mock"
REMOTE_PROVIDER = "remote-llm"


@dataclass(frozen=True)
class ProviderConfig:
    provider_kind: str = MOCK_PROVIDER
    model_name: str = ""
    endpoint: str = ""
    credential_env: str = ""  # name of the env var holding the API key
    request_timeout: float = 30.0
    max_attempts: int = 3
    script_path: str = ""  # mock only

    def __post_init__(self):
        if self.provider_kind not in (MOCK_PROVIDER, REMOTE_PROVIDER):
            raise ValueError(f"unknown provider kind {self.provider_kind!r}")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def provider_config_from_dict(doc: Mapping) -> ProviderConfig:
    try:
        return ProviderConfig(
            provider_kind=doc.get("provider_kind", MOCK_PROVIDER),
            model_name=doc.get("model_name", ""),
            endpoint=doc.get("endpoint", ""),
            credential_env=doc.get("credential_env", ""),
            request_timeout=doc.get("request_timeout", 30.0),
            max_attempts=doc.get("max_attempts", 3),
            script_path=doc.get("script_path", ""),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid provider config: {exc}") from exc


class CompletionProvider(Protocol):
    name: str

    def complete(self, system_text: str, user_text: str, *, tag: str, attempt: int = 0) -> str:
        ...


class MockProvider:
    """Deterministic provider backed by a scenario script.

    The script maps tags to either a single response (used for every
    attempt) or a list indexed by attempt (the last entry repeats once
    exhausted). A "default" entry answers unknown tags.
    """

    name = MOCK_PROVIDER

    def __init__(self, script: Mapping | str | Path):
        if isinstance(script, (str, Path)):
            try:
                script = json.loads(Path(script).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot load mock script: {exc}") from exc
        self._script = dict(script)

    def complete(self, system_text: str, user_text: str, *, tag: str, attempt: int = 0) -> str:
        entry = self._script.get(tag, self._script.get("default"))
        if entry is None:
            raise ProviderError(f"mock script has no response for tag {tag!r}")
        if isinstance(entry, list):
            if not entry:
                raise ProviderError(f"mock script entry for {tag!r} is empty")
            return str(entry[min(attempt, len(entry) - 1)])
        return str(entry)


class RemoteProvider:
    """Chat-completion client: one system plus one user message, temperature 0."""

    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None):
        if not config.endpoint:
            raise ConfigError("remote provider requires an endpoint")
        self._config = config
        self._client = client or httpx.Client(timeout=config.request_timeout)
        self.name = config.model_name or REMOTE_PROVIDER

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self._config.credential_env:
            key = os.environ.get(self._config.credential_env, "")
            if not key:
                raise ProviderError(
                    f"credential env var {self._config.credential_env} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, system_text: str, user_text: str, *, tag: str, attempt: int = 0) -> str:
        body = {
            "model": self._config.model_name,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
            "temperature": 0,
        }
        last_error: Exception | None = None
        for retry in range(self._config.max_attempts):
            try:
                response = self._client.post(
                    self._config.endpoint, json=body, headers=self._headers()
                )
                response.raise_for_status()
                data = response.json()
                return data["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if retry + 1 < self._config.max_attempts:
                    time.sleep(min(2.0, 0.25 * 2**retry))
        raise ProviderError(
            f"provider request failed after {self._config.max_attempts} attempts: {last_error}"
        )


def provider_from_config(config: ProviderConfig) -> CompletionProvider:
    if config.provider_kind == MOCK_PROVIDER:
        if not config.script_path:
            raise ConfigError("mock provider requires script_path")
        return MockProvider(config.script_path)
    return RemoteProvider(config)
