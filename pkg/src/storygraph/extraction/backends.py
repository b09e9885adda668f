"""Chat backends: live HTTP and recorded replay.

Both expose the same two-call surface, one request per prompt chain.  The
HTTP backend speaks the common chat-completions wire shape; when the model
supports function calls a single tool is attached and its arguments are
returned pre-parsed.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import requests

from ..errors import BackendError, ConfigError, ResponseParseError
from .config import ExtractorConfig

log = logging.getLogger(__name__)

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}

_ROLE_MAP = {"system": "system", "human": "user", "user": "user", "ai": "assistant"}

_TOOL_SCHEMA = {
    "type": "function",
    "function": {
        "name": "extract_graph_components",
        "description": (
            "Record the nodes and relationships extracted from the user story."
        ),
        "parameters": {
            "type": "object",
            "properties": {
                "nodes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "id": {"type": "string"},
                            "type": {"type": "string"},
                        },
                        "required": ["id", "type"],
                    },
                },
                "relationships": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "source": {"type": "string"},
                            "source_type": {"type": "string"},
                            "target": {"type": "string"},
                            "target_type": {"type": "string"},
                            "type": {"type": "string"},
                        },
                        "required": ["source", "target", "type"],
                    },
                },
            },
            "required": ["nodes", "relationships"],
        },
    },
}


@dataclass
class BackendReply:
    """Either free text or a pre-parsed function-call payload."""

    content: str | None = None
    structured: dict[str, Any] | None = None


class ChatHttpBackend:
    def __init__(self, config: ExtractorConfig):
        self.config = config

    def run_main(self, story_text: str, messages: list[tuple[str, str]]) -> BackendReply:
        tools = [_TOOL_SCHEMA] if self.config.supports_function_calls else None
        return self._request(messages, tools)

    def run_benefit(self, story_text: str, messages: list[tuple[str, str]]) -> BackendReply:
        return self._request(messages, None)

    def _request(self, messages, tools) -> BackendReply:
        body: dict[str, Any] = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": _ROLE_MAP.get(role, role), "content": text}
                for role, text in messages
            ],
        }
        if tools:
            body["tools"] = tools

        headers = {"Content-Type": "application/json"}
        token = self.config.resolved_auth_token()
        if token:
            headers["Authorization"] = f"Bearer {token}"

        last_error = "no attempt made"
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.config.retry_backoff * (2 ** (attempt - 1)))
            try:
                response = requests.post(
                    self.config.endpoint,
                    json=body,
                    headers=headers,
                    timeout=self.config.request_timeout,
                )
            except requests.RequestException as exc:
                last_error = f"request failed: {exc}"
                log.warning("attempt %d/%d: %s", attempt + 1, attempts, last_error)
                continue
            if response.status_code in _RETRYABLE_STATUS:
                last_error = f"server returned status {response.status_code}"
                log.warning("attempt %d/%d: %s", attempt + 1, attempts, last_error)
                continue
            if response.status_code != 200:
                raise BackendError(
                    f"backend rejected the request with status {response.status_code}"
                )
            return self._parse_reply(response)
        raise BackendError(f"backend unavailable after {attempts} attempts: {last_error}")

    @staticmethod
    def _parse_reply(response: requests.Response) -> BackendReply:
        try:
            data = response.json()
            message = data["choices"][0]["message"]
        except (ValueError, LookupError, TypeError) as exc:
            raise BackendError(f"malformed backend response: {exc}") from exc

        calls = message.get("tool_calls") or []
        if calls:
            arguments = calls[0].get("function", {}).get("arguments", "")
        elif message.get("function_call"):
            arguments = message["function_call"].get("arguments", "")
        else:
            return BackendReply(content=message.get("content") or "")
        if isinstance(arguments, dict):
            return BackendReply(structured=arguments)
        try:
            return BackendReply(structured=json.loads(arguments))
        except ValueError as exc:
            raise ResponseParseError(
                f"function-call arguments are not valid JSON: {exc}", raw=str(arguments)
            ) from exc


class ReplayFixtureBackend:
    """Replays canned responses keyed by story text.

    Fixture shape: {story_text: {"main_response": str | object,
    "benefit_response": str | object}}.  A dict-valued response is treated
    as an already-structured payload, a string as raw model output.
    """

    def __init__(self, fixture: dict[str, Any]):
        self.fixture = fixture

    @classmethod
    def from_path(cls, path: str | Path) -> "ReplayFixtureBackend":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"replay fixture not found: {path}")
        with path.open("rb") as fh:
            fixture = json.load(fh)
        if not isinstance(fixture, dict):
            raise ConfigError(f"replay fixture must be a JSON object: {path}")
        return cls(fixture)

    def _entry(self, story_text: str) -> dict[str, Any]:
        entry = self.fixture.get(story_text)
        if entry is None:
            raise BackendError(f"no fixture entry for story: {story_text[:100]!r}")
        return entry

    @staticmethod
    def _reply(value: Any) -> BackendReply:
        if isinstance(value, dict):
            return BackendReply(structured=value)
        return BackendReply(content="" if value is None else str(value))

    def run_main(self, story_text: str, messages: list[tuple[str, str]]) -> BackendReply:
        return self._reply(self._entry(story_text).get("main_response"))

    def run_benefit(self, story_text: str, messages: list[tuple[str, str]]) -> BackendReply:
        return self._reply(self._entry(story_text).get("benefit_response"))
