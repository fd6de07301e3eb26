"""Pluggable language-model transport: off, mock, or live.

The mock client replays scripted responses (a list, or a directory of
ordered files) so planner behavior is testable without a network. The live
client talks to a chat-completions style endpoint; configuration comes from
CODESCOPE_LLM_ENDPOINT and CODESCOPE_LLM_API_KEY.
"""
from __future__ import annotations

import os
from pathlib import Path

from .errors import LLMUnavailable

DEFAULT_TIMEOUT_S = 30.0


class LLMClient:
    """Transport interface: one prompt in, one text completion out."""

    def complete(self, prompt: str) -> str:
        raise LLMUnavailable("no client configured")


class MockLLMClient(LLMClient):
    """Replays canned responses in order; raises when the script runs out."""

    def __init__(self, responses: list[str]):
        self.responses = list(responses)
        self.requests: list[str] = []  # prompts seen, for assertions

    @classmethod
    def from_dir(cls, fixture_dir: str | Path) -> "MockLLMClient":
        root = Path(fixture_dir)
        if not root.is_dir():
            raise LLMUnavailable(f"mock fixture directory missing: {root}")
        files = sorted(p for p in root.iterdir() if p.is_file())
        return cls([p.read_text(encoding="utf-8") for p in files])

    def complete(self, prompt: str) -> str:
        self.requests.append(prompt)
        if not self.responses:
            raise LLMUnavailable("mock response script exhausted")
        return self.responses.pop(0)


class LiveLLMClient(LLMClient):
    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        model: str = "default",
        timeout: float = DEFAULT_TIMEOUT_S,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(
                self.endpoint,
                json={
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                },
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
            return body["choices"][0]["message"]["content"]
        except Exception as exc:
            raise LLMUnavailable(f"llm endpoint failed: {exc}") from exc


def client_from_env(mode: str, fixtures_dir: str | None = None) -> LLMClient | None:
    """Build the client for CODESCOPE_LLM_MODE; None when mode is off."""
    if mode == "off":
        return None
    if mode == "mock":
        directory = fixtures_dir or os.environ.get("CODESCOPE_LLM_FIXTURES", "")
        if not directory:
            raise LLMUnavailable("mock mode needs CODESCOPE_LLM_FIXTURES")
        return MockLLMClient.from_dir(directory)
    if mode == "live":
        endpoint = os.environ.get("CODESCOPE_LLM_ENDPOINT", "")
        if not endpoint:
            raise LLMUnavailable("live mode needs CODESCOPE_LLM_ENDPOINT")
        return LiveLLMClient(endpoint, api_key=os.environ.get("CODESCOPE_LLM_API_KEY", ""))
    raise LLMUnavailable(f"unknown llm mode: {mode}")
