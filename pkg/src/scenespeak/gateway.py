"""Provider gateway: prompt assembly, context window, streamed completions.

The model is driven through an OpenAI-style chat-completions endpoint.
Responses are consumed as a line stream: each newline-terminated API call
is handed to the caller the moment it arrives, so scene edits start while
the model is still generating.
"""
from __future__ import annotations

import json
import os
import time
from collections import deque
from dataclasses import dataclass
from importlib import resources
from typing import Any, Callable, Iterator

import httpx

from .scene import Scene


class GatewayError(Exception):
    """Base for provider-side failures; all of them end the current stream."""


class GatewayTimeout(GatewayError):
    pass


class TransportError(GatewayError):
    pass


class ProviderError(GatewayError):
    def __init__(self, status: int, detail: str = "") -> None:
        super().__init__(f"provider returned {status}: {detail}")
        self.status = status


class NoScriptMatch(GatewayError):
    """Mock provider had no entry matching the outgoing user message."""


class MissingPlaceholder(ValueError):
    """System prompt template lacks (or repeats) a required placeholder."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def to_doc(self) -> dict[str, str]:
        return {"role": self.role, "content": self.content}


PLACEHOLDERS = ("<prefabs_info>", "<room_info>", "<env_objects>")


def load_prompt_template(task: str) -> str:
    """Bundled system prompt template; `task` is "task1" or "task2"."""
    name = {"task1": "system_task1.txt", "task2": "system_task2.txt"}.get(task)
    if name is None:
        raise ValueError(f"unknown prompt template {task!r}")
    return resources.files("scenespeak").joinpath(f"prompts/{name}").read_text(encoding="utf-8")


def render_system_prompt(template: str, scene: Scene) -> str:
    """Substitute scene state into the template.

    Each placeholder must occur exactly once: prefab catalog (2-space
    JSON), room block (two newline-terminated lines), environment boxes
    (4-space JSON).
    """
    for ph in PLACEHOLDERS:
        if template.count(ph) != 1:
            raise MissingPlaceholder(f"template must contain {ph} exactly once")
    out = template.replace("<prefabs_info>", scene.prefabs_json())
    out = out.replace("<room_info>", scene.room.render_text())
    out = out.replace("<env_objects>", scene.environment_json())
    return out


def load_oneshot() -> tuple[str, str]:
    """The pinned example exchange sent after the system prompt."""
    base = resources.files("scenespeak").joinpath("prompts")
    user = base.joinpath("oneshot_user.json").read_text(encoding="utf-8")
    assistant = base.joinpath("oneshot_assistant.txt").read_text(encoding="utf-8")
    return user, assistant


class ContextWindow:
    """System prompt + one-shot pair + a bounded tail of real exchanges.

    The pinned head never changes after construction. The tail keeps the
    most recent `capacity` user/assistant pairs; committing past capacity
    evicts the oldest pair.
    """

    def __init__(self, system: str, shot_user: str, shot_assistant: str,
                 capacity: int = 5) -> None:
        self.system = system
        self.shot_user = shot_user
        self.shot_assistant = shot_assistant
        self.capacity = capacity
        self.history: deque[tuple[str, str]] = deque(maxlen=capacity)

    def commit_exchange(self, user_content: str, assistant_content: str) -> None:
        self.history.append((user_content, assistant_content))

    def window_view(self) -> list[ChatMessage]:
        msgs = [
            ChatMessage("system", self.system),
            ChatMessage("user", self.shot_user),
            ChatMessage("assistant", self.shot_assistant),
        ]
        for user, assistant in self.history:
            msgs.append(ChatMessage("user", user))
            msgs.append(ChatMessage("assistant", assistant))
        return msgs

    def messages_for(self, user_content: str) -> list[ChatMessage]:
        return self.window_view() + [ChatMessage("user", user_content)]


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4"
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    top_p: float = 1.0
    seed: int | None = None
    timeout_s: float = 60.0

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise GatewayError(
                f"no API key: set the {self.api_key_env} environment variable")
        return key


def _iter_lines(chunks: Iterator[str]) -> Iterator[str]:
    """Split a text-chunk stream on newlines, yielding lines as they
    complete; a non-empty unterminated tail is yielded last."""
    buf = ""
    for chunk in chunks:
        buf += chunk
        while "\n" in buf:
            line, buf = buf.split("\n", 1)
            yield line
    if buf:
        yield buf


class OpenAIChatProvider:
    """Streaming client for a chat-completions endpoint (SSE)."""

    def __init__(self, config: ProviderConfig,
                 transport: httpx.BaseTransport | None = None) -> None:
        self.config = config
        self._transport = transport

    def stream_lines(self, messages: list[ChatMessage]) -> Iterator[str]:
        yield from _iter_lines(self._stream_text(messages))

    def _stream_text(self, messages: list[ChatMessage]) -> Iterator[str]:
        cfg = self.config
        body: dict[str, Any] = {
            "model": cfg.model,
            "messages": [m.to_doc() for m in messages],
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "stream": True,
        }
        if cfg.seed is not None:
            body["seed"] = cfg.seed
        headers = {"Authorization": f"Bearer {cfg.api_key()}"}
        try:
            with httpx.Client(timeout=cfg.timeout_s,
                              transport=self._transport) as client:
                with client.stream("POST", f"{cfg.base_url}/chat/completions",
                                   json=body, headers=headers) as resp:
                    if resp.status_code != 200:
                        resp.read()
                        raise ProviderError(resp.status_code, resp.text[:400])
                    for raw in resp.iter_lines():
                        if not raw.startswith("data:"):
                            continue
                        data = raw[len("data:"):].strip()
                        if data == "[DONE]":
                            return
                        try:
                            event = json.loads(data)
                        except json.JSONDecodeError:
                            continue
                        delta = event.get("choices", [{}])[0].get("delta", {})
                        piece = delta.get("content")
                        if piece:
                            yield piece
        except httpx.TimeoutException as exc:
            raise GatewayTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc


@dataclass(frozen=True)
class ScriptEntry:
    """One canned exchange: fires when `match` is found in the user message."""

    match: str
    response: str
    line_delay_s: float = 0.0


class MockProvider:
    """Deterministic stand-in for the real endpoint.

    Entries are tried in order against the outgoing user message; the
    first whose `match` substring is present wins. Lines of the response
    are yielded one at a time with the entry's delay, so streaming
    consumers behave exactly as with a live provider.
    """

    def __init__(self, script: list[ScriptEntry],
                 sleep: Callable[[float], None] = time.sleep) -> None:
        self.script = list(script)
        self._sleep = sleep
        self.calls: list[list[ChatMessage]] = []

    @classmethod
    def from_file(cls, path: str) -> "MockProvider":
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        entries = [
            ScriptEntry(
                match=e["match"],
                response=e["response"],
                line_delay_s=float(e.get("line_delay_s", 0.0)),
            )
            for e in doc
        ]
        return cls(entries)

    def stream_lines(self, messages: list[ChatMessage]) -> Iterator[str]:
        self.calls.append(messages)
        last_user = next((m for m in reversed(messages) if m.role == "user"), None)
        if last_user is None:
            raise NoScriptMatch("no user message in request")
        for entry in self.script:
            if entry.match in last_user.content:
                return self._stream_entry(entry)
        raise NoScriptMatch("no script entry matches the request")

    def _stream_entry(self, entry: ScriptEntry) -> Iterator[str]:
        lines = entry.response.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        for line in lines:
            if entry.line_delay_s > 0:
                self._sleep(entry.line_delay_s)
            yield line
