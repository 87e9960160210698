"""Prompt rendering, the sliding context window, and both providers."""

import json

import httpx
import pytest

from scenespeak.gateway import (
    ChatMessage,
    ContextWindow,
    GatewayError,
    GatewayTimeout,
    MissingPlaceholder,
    MockProvider,
    NoScriptMatch,
    OpenAIChatProvider,
    ProviderConfig,
    ProviderError,
    ScriptEntry,
    TransportError,
    load_oneshot,
    load_prompt_template,
    render_system_prompt,
)


class TestTemplates:
    def test_both_tasks_render(self, sandbox):
        for task in ("task1", "task2"):
            text = render_system_prompt(load_prompt_template(task), sandbox)
            assert "<prefabs_info>" not in text
            assert "<room_info>" not in text
            assert "<env_objects>" not in text
            assert '"prefabs"' in text

    def test_unknown_task(self):
        with pytest.raises(ValueError, match="unknown prompt template"):
            load_prompt_template("task9")

    def test_missing_placeholder(self, sandbox):
        with pytest.raises(MissingPlaceholder):
            render_system_prompt("no placeholders here", sandbox)

    def test_repeated_placeholder(self, sandbox):
        template = "<prefabs_info> <room_info> <env_objects> <room_info>"
        with pytest.raises(MissingPlaceholder):
            render_system_prompt(template, sandbox)

    def test_oneshot_pair_loads(self):
        user, assistant = load_oneshot()
        json.loads(user)
        assert assistant.splitlines()[0].startswith("CREATE(")


class TestContextWindow:
    def make(self):
        return ContextWindow("SYS", "SHOT_U", "SHOT_A")

    def test_length_formula(self):
        window = self.make()
        for k in range(9):
            assert len(window.window_view()) == 3 + 2 * min(k, 5)
            window.commit_exchange(f"u{k}", f"a{k}")

    def test_pinned_head_is_stable(self):
        window = self.make()
        for k in range(7):
            window.commit_exchange(f"u{k}", f"a{k}")
        head = window.window_view()[:3]
        assert [m.content for m in head] == ["SYS", "SHOT_U", "SHOT_A"]
        assert [m.role for m in head] == ["system", "user", "assistant"]

    def test_eviction_keeps_latest_pairs(self):
        window = self.make()
        for k in range(8):
            window.commit_exchange(f"u{k}", f"a{k}")
        tail = window.window_view()[3:]
        assert [m.content for m in tail] == [
            "u3", "a3", "u4", "a4", "u5", "a5", "u6", "a6", "u7", "a7"]

    def test_messages_for_appends_request(self):
        window = self.make()
        msgs = window.messages_for("NEW")
        assert msgs[-1] == ChatMessage("user", "NEW")
        assert len(msgs) == 4


class TestMockProvider:
    def test_first_matching_entry_wins(self):
        provider = MockProvider([
            ScriptEntry("chair", "A;"),
            ScriptEntry("", "B;"),
        ])
        lines = list(provider.stream_lines([ChatMessage("user", "move the chair")]))
        assert lines == ["A;"]
        lines = list(provider.stream_lines([ChatMessage("user", "table")]))
        assert lines == ["B;"]

    def test_no_match_raises_at_call(self):
        provider = MockProvider([ScriptEntry("chair", "A;")])
        with pytest.raises(NoScriptMatch):
            provider.stream_lines([ChatMessage("user", "nothing")])

    def test_line_delay_uses_injected_sleep(self):
        naps = []
        provider = MockProvider([ScriptEntry("", "a;\nb;\nc;", line_delay_s=0.5)],
                                sleep=naps.append)
        assert list(provider.stream_lines([ChatMessage("user", "x")])) == ["a;", "b;", "c;"]
        assert naps == [0.5, 0.5, 0.5]

    def test_calls_are_recorded(self):
        provider = MockProvider([ScriptEntry("", "a;")])
        msgs = [ChatMessage("system", "s"), ChatMessage("user", "u")]
        list(provider.stream_lines(msgs))
        assert provider.calls == [msgs]

    def test_from_file(self, script_file):
        path = script_file([{"match": "x", "response": "A;\nB;", "line_delay_s": 0}])
        provider = MockProvider.from_file(path)
        assert list(provider.stream_lines([ChatMessage("user", "x")])) == ["A;", "B;"]


def sse_body(pieces):
    chunks = [json.dumps({"choices": [{"delta": {"content": p}}]}) for p in pieces]
    chunks.append("[DONE]")
    return "".join(f"data: {c}\n\n" for c in chunks)


def transport_returning(body, status=200):
    def handler(request):
        return httpx.Response(status, content=body.encode(),
                              headers={"content-type": "text/event-stream"})

    return httpx.MockTransport(handler)


class TestOpenAIProvider:
    def config(self):
        return ProviderConfig(base_url="http://mock/v1", model="m", seed=7)

    def test_reassembles_lines_across_chunks(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")
        body = sse_body(['CREATE("Chair");\nMOV', 'E("crt", 1, 2, 3);\nLOOK',
                         'AT("crt", x=0);'])
        provider = OpenAIChatProvider(self.config(), transport_returning(body))
        lines = list(provider.stream_lines([ChatMessage("user", "hi")]))
        assert lines == ['CREATE("Chair");', 'MOVE("crt", 1, 2, 3);',
                         'LOOKAT("crt", x=0);']

    def test_request_body_and_auth(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "sekrit")
        seen = {}

        def handler(request):
            seen["url"] = str(request.url)
            seen["auth"] = request.headers.get("authorization")
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, content=sse_body(["ok"]).encode())

        provider = OpenAIChatProvider(self.config(), httpx.MockTransport(handler))
        list(provider.stream_lines([ChatMessage("user", "hi")]))
        assert seen["url"] == "http://mock/v1/chat/completions"
        assert seen["auth"] == "Bearer sekrit"
        assert seen["body"]["model"] == "m"
        assert seen["body"]["stream"] is True
        assert seen["body"]["seed"] == 7
        assert seen["body"]["messages"] == [{"role": "user", "content": "hi"}]

    def test_garbage_events_are_skipped(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")
        body = ("event: noise\n\n"
                "data: {broken json\n\n"
                + sse_body(["fine;"]))
        provider = OpenAIChatProvider(self.config(), transport_returning(body))
        assert list(provider.stream_lines([ChatMessage("user", "hi")])) == ["fine;"]

    def test_http_status_maps_to_provider_error(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")
        provider = OpenAIChatProvider(self.config(),
                                      transport_returning("nope", status=500))
        with pytest.raises(ProviderError) as err:
            list(provider.stream_lines([ChatMessage("user", "hi")]))
        assert err.value.status == 500

    def test_timeout_maps_to_gateway_timeout(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")

        def handler(request):
            raise httpx.ReadTimeout("slow")

        provider = OpenAIChatProvider(self.config(), httpx.MockTransport(handler))
        with pytest.raises(GatewayTimeout):
            list(provider.stream_lines([ChatMessage("user", "hi")]))

    def test_network_failure_maps_to_transport_error(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")

        def handler(request):
            raise httpx.ConnectError("refused")

        provider = OpenAIChatProvider(self.config(), httpx.MockTransport(handler))
        with pytest.raises(TransportError):
            list(provider.stream_lines([ChatMessage("user", "hi")]))

    def test_missing_api_key(self, monkeypatch):
        monkeypatch.delenv("OPENAI_API_KEY", raising=False)
        provider = OpenAIChatProvider(self.config())
        with pytest.raises(GatewayError, match="no API key"):
            list(provider.stream_lines([ChatMessage("user", "hi")]))
