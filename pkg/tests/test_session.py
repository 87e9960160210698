"""Session core: config validation, ingest protocol, finalize paths,
metrics, and record/replay determinism."""

import json

import pytest

from scenespeak.capture import CaptureConfig
from scenespeak.gateway import ProviderConfig
from scenespeak.geometry import Vec3, avg_corner_distance
from scenespeak.session import (
    ConfigError,
    DivergenceError,
    IngestError,
    Session,
    SessionConfig,
    TraceFormatError,
    TraceRecorder,
    check_target,
    read_trace,
    replay_trace,
)


def mover_config(script_path, **kw):
    return SessionConfig(mode="mover", task="sandbox", scene="sandbox",
                         mock_script=str(script_path), **kw)


@pytest.fixture
def match_all(script_file):
    return script_file([{"match": "", "response":
                         'MOVE("-23780", 5.00, 0.67, 5.00);\nMESSAGE("done");'}])


@pytest.fixture
def session(match_all):
    s = Session(mover_config(match_all))
    yield s
    s.close()


def events_of(session):
    captured = []
    session.subscribe(captured.append)
    return captured


def trace_types(session):
    return [json.loads(line)["type"] for line in session.log]


class TestConfig:
    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            SessionConfig(mode="zen")

    def test_bad_task(self):
        with pytest.raises(ConfigError):
            SessionConfig(mode="control", task="task9")

    def test_mover_needs_a_provider(self):
        with pytest.raises(ConfigError, match="provider or a mock"):
            SessionConfig(mode="mover")

    def test_voice_needs_a_provider(self):
        with pytest.raises(ConfigError):
            SessionConfig(mode="voice")

    def test_control_needs_none(self):
        cfg = SessionConfig(mode="control", task="task1a", scene="task1a")
        assert cfg.provider is None

    def test_create_delete_gate(self):
        assert SessionConfig(mode="control").allow_create_delete
        assert not SessionConfig(mode="control", task="task1a",
                                 scene="task1a").allow_create_delete

    def test_prompt_task(self):
        assert SessionConfig(mode="control").prompt_task == "task2"
        assert SessionConfig(mode="control", task="task1b",
                             scene="task1b").prompt_task == "task1"

    def test_doc_roundtrip(self):
        cfg = SessionConfig(
            mode="control", task="task1a", scene="task1a", debug_explain=True,
            capture=CaptureConfig(angle_threshold_deg=12.0, min_duration_ms=700),
            provider=ProviderConfig(model="gpt-4o", seed=7),
        )
        again = SessionConfig.from_doc(cfg.to_doc())
        assert again == cfg


class TestIngestValidation:
    def test_non_dict(self, session):
        with pytest.raises(IngestError):
            session.ingest("word")

    def test_unknown_type(self, session):
        with pytest.raises(IngestError, match="unknown event type"):
            session.ingest({"type": "sneeze", "t_ms": 1})

    def test_missing_clock(self, session):
        with pytest.raises(IngestError, match="t_ms"):
            session.ingest({"type": "word", "text": "hi"})

    def test_word_needs_text(self, session):
        with pytest.raises(IngestError):
            session.ingest({"type": "word", "t_ms": 1, "text": ""})

    def test_pose_needs_triples(self, session):
        with pytest.raises(IngestError, match="pose.forward"):
            session.ingest({"type": "pose", "t_ms": 1,
                            "position": [0, 1, 0], "forward": [0, 0],
                            "right": [1, 0, 0]})

    def test_select_needs_id_list(self, session):
        with pytest.raises(IngestError):
            session.ingest({"type": "select", "t_ms": 1, "ids": "no"})

    def test_hand_needs_a_side(self, session):
        with pytest.raises(IngestError):
            session.ingest({"type": "hand", "t_ms": 1})

    def test_apply_needs_line(self, session):
        with pytest.raises(IngestError):
            session.ingest({"type": "apply", "t_ms": 1})

    def test_failed_ingest_stays_out_of_trace(self, session):
        before = list(session.log)
        with pytest.raises(IngestError):
            session.ingest({"type": "point", "t_ms": 1,
                            "position": [0, 1], "normal": [0, 1, 0]})
        assert session.log == before

    def test_failed_ingest_does_not_burn_ids(self, session):
        bad = {"type": "point", "t_ms": 1, "target": "Floor",
               "position": [1, 0, 1], "normal": "up"}
        with pytest.raises(IngestError):
            session.ingest(bad)
        session.ingest({"type": "point", "t_ms": 2, "target": "Floor",
                        "position": [1.0, 0.0, 1.0], "normal": [0, 1, 0]})
        assert session.accumulator.points[0].hit_id == "h0"

    def test_failed_line_does_not_burn_ids(self, session):
        end = {"object": "Floor", "position": [1, 0, 1], "normal": [0, 1, 0]}
        with pytest.raises(IngestError):
            session.ingest({"type": "line", "t_ms": 1, "start": end,
                            "end": {"object": "x", "position": [1, 0],
                                    "normal": [0, 1, 0]}})
        session.ingest({"type": "line", "t_ms": 2, "start": end, "end": end})
        assert session.accumulator.lines[0].line_id == "d0"


class TestIngestEffects:
    def test_pose_updates_player(self, session):
        session.ingest({"type": "pose", "t_ms": 5, "position": [1, 1.6, 1],
                        "forward": [0, 0, 1], "right": [1, 0, 0]})
        assert session.player.position == Vec3(1, 1.6, 1)

    def test_point_updates_selection_anchor(self, session):
        session.ingest({"type": "point", "t_ms": 5, "target": "Floor",
                        "position": [2.0, 0.0, 3.0], "normal": [0, 1, 0]})
        assert session.selection.last_point.position == Vec3(2, 0, 3)

    def test_select_replaces_selection(self, session):
        session.ingest({"type": "select", "t_ms": 5, "ids": ["-23780"]})
        assert session.selection.selected == ["-23780"]

    def test_apply_runs_one_line(self, session):
        captured = events_of(session)
        session.ingest({"type": "apply", "t_ms": 5,
                        "line": 'MOVE("-23780", 1.00, 0.05, 1.00);'})
        assert session.scene.get("-23780").position == Vec3(1.0, 0.05, 1.0)
        revision = [e for e in captured if e["type"] == "event.revision"]
        assert len(revision) == 1
        assert revision[0]["revision"] == session.scene.revision

    def test_apply_skip_warns(self, session):
        captured = events_of(session)
        session.ingest({"type": "apply", "t_ms": 5, "line": 'MOVE("ghost", 1);'})
        warn = [e for e in captured if e["type"] == "event.warning"]
        assert warn and warn[0]["reason"] == "line_skipped"


class TestMoverFinalize:
    def test_trace_entry_order(self, session):
        session.ingest({"type": "word", "t_ms": 100, "text": "move",
                        "start_ms": 100, "end_ms": 200})
        session.ingest({"type": "word", "t_ms": 300, "text": "it",
                        "start_ms": 300, "end_ms": 400})
        session.ingest({"type": "finalize", "t_ms": 500})
        assert trace_types(session) == [
            "header", "word", "word", "finalize",
            "llm_request", "llm_response", "outcomes"]

    def test_response_and_outcomes(self, session):
        captured = events_of(session)
        session.ingest({"type": "word", "t_ms": 100, "text": "go",
                        "start_ms": 100, "end_ms": 200})
        session.ingest({"type": "finalize", "t_ms": 500})
        docs = [json.loads(line) for line in session.log]
        response = next(d for d in docs if d["type"] == "llm_response")
        assert response["text"] == \
            'MOVE("-23780", 5.00, 0.67, 5.00);\nMESSAGE("done");'
        assert response["error"] is None
        outcomes = next(d for d in docs if d["type"] == "outcomes")
        assert [e["status"] for e in outcomes["entries"]] == \
            ["applied", "message"]
        end = [e for e in captured if e["type"] == "event.stream_end"][0]
        assert end["applied"] == 1 and end["skipped"] == 0
        assert end["error"] is None
        kinds = [e["type"] for e in captured]
        assert kinds.index("event.revision") < kinds.index("event.message")

    def test_window_commits_successful_lines(self, session):
        session.ingest({"type": "word", "t_ms": 100, "text": "go",
                        "start_ms": 100, "end_ms": 200})
        session.ingest({"type": "finalize", "t_ms": 500})
        user, assistant = session.window.history[-1]
        assert '"user_request"' in user
        assert assistant == \
            'MOVE("-23780", 5.00, 0.67, 5.00);\nMESSAGE("done");'

    def test_display_text_fallback(self, session):
        session.ingest({"type": "finalize", "t_ms": 500,
                        "display_text": "move the cactus"})
        request = next(json.loads(l) for l in session.log
                       if json.loads(l)["type"] == "llm_request")
        payload = json.loads(request["payload"])
        assert payload["user_request"] == "move the cactus"

    def test_interjection_only_skips_provider(self, session):
        captured = events_of(session)
        session.ingest({"type": "word", "t_ms": 100, "text": "umm",
                        "start_ms": 100, "end_ms": 200})
        session.ingest({"type": "finalize", "t_ms": 500})
        assert session.provider.calls == []
        assert trace_types(session) == ["header", "word", "finalize", "warning"]
        assert captured[0]["type"] == "event.warning"
        assert captured[0]["reason"] == "interjection_only"

    def test_accumulator_resets_after_finalize(self, session):
        session.ingest({"type": "word", "t_ms": 100, "text": "go",
                        "start_ms": 100, "end_ms": 200})
        session.ingest({"type": "finalize", "t_ms": 500})
        assert session.accumulator.words == []
        assert session.accumulator.poses == []

    def test_provider_failure_becomes_warning(self, script_file):
        script = script_file([{"match": "zebra", "response": "MESSAGE(\"x\");"}])
        s = Session(mover_config(script))
        captured = events_of(s)
        s.ingest({"type": "word", "t_ms": 100, "text": "hello",
                  "start_ms": 100, "end_ms": 200})
        s.ingest({"type": "finalize", "t_ms": 500})
        docs = [json.loads(line) for line in s.log]
        response = next(d for d in docs if d["type"] == "llm_response")
        assert response["error"]["kind"] == "no_script_match"
        warn = [e for e in captured if e["type"] == "event.warning"][0]
        assert warn["reason"] == "provider:no_script_match"
        end = [e for e in captured if e["type"] == "event.stream_end"][0]
        assert end["applied"] == 0 and end["error"]["kind"] == "no_script_match"
        # the failed exchange still commits, with an empty assistant turn
        assert s.window.history[-1][1] == ""

    def test_measured_latency_lands_in_metrics(self, match_all):
        s = Session(mover_config(match_all, measure_latency=True))
        s.ingest({"type": "word", "t_ms": 100, "text": "go",
                  "start_ms": 100, "end_ms": 200})
        s.ingest({"type": "finalize", "t_ms": 500})
        report = s.metrics_report()
        assert len(report["first_action_latency_ms"]) == 1
        assert report["first_action_latency_ms"][0] >= 0.0


class TestVoiceFinalize:
    @pytest.fixture
    def voice(self, match_all):
        cfg = SessionConfig(mode="voice", task="sandbox", scene="sandbox",
                            mock_script=str(match_all))
        s = Session(cfg)
        yield s
        s.close()

    def say(self, session, text, t0=100):
        for i, word in enumerate(text.split()):
            session.ingest({"type": "word", "t_ms": t0 + 300 * i, "text": word,
                            "start_ms": t0 + 300 * i, "end_ms": t0 + 300 * i + 250})
        session.ingest({"type": "finalize", "t_ms": t0 + 300 * len(text.split())})

    def test_command_applies_without_provider_call(self, voice):
        captured = events_of(voice)
        self.say(voice, "create a chair")
        assert voice.provider.calls == []
        assert voice.scene.find_by_prefab("Chair")
        assert [e["type"] for e in captured] == ["event.revision"]
        assert trace_types(voice)[-1] == "outcomes"

    def test_no_match_reason_is_surfaced(self, voice):
        captured = events_of(voice)
        self.say(voice, "move the submarine left")
        warn = [e for e in captured if e["type"] == "event.warning"][0]
        assert warn["reason"] == "no_match:missing_subject"

    def test_interjection_silenced(self, voice):
        captured = events_of(voice)
        self.say(voice, "umm")
        assert captured[0]["reason"] == "interjection_only"

    def test_move_here_uses_last_point(self, voice):
        self.say(voice, "create a chair")
        voice.ingest({"type": "point", "t_ms": 2000, "target": "Floor",
                      "position": [2.0, 0.0, 3.0], "normal": [0, 1, 0]})
        self.say(voice, "move the chair here", t0=3000)
        assert voice.scene.find_by_prefab("Chair")[0].position == Vec3(2, 0, 3)


class TestControlFinalize:
    def test_instructions_ignored(self):
        s = Session(SessionConfig(mode="control"))
        captured = events_of(s)
        s.ingest({"type": "word", "t_ms": 1, "text": "hi",
                  "start_ms": 1, "end_ms": 2})
        s.ingest({"type": "finalize", "t_ms": 10})
        assert captured[0]["reason"] == "instructions_ignored"


GOAL_POS = (7.49, 1.045, 1.39)


class TestMetrics:
    @pytest.fixture
    def task(self):
        return Session(SessionConfig(mode="control", task="task1a",
                                     scene="task1a"))

    def move(self, session, t_ms, x, y, z):
        session.ingest({"type": "apply", "t_ms": t_ms,
                        "line": f'MOVE("1", {x}, {y}, {z});'})

    def test_check_target_thresholds(self):
        assert check_target(0.30) == "none"
        assert check_target(0.299) == "coarse"
        assert check_target(0.12) == "coarse"
        assert check_target(0.119) == "fine"

    def test_coarse_then_fine_timestamps(self, task):
        captured = events_of(task)
        x, y, z = GOAL_POS
        self.move(task, 1000, x + 0.25, y, z)
        self.move(task, 2000, x, y, z)
        metrics = [e for e in captured if e["type"] == "event.metrics"]
        assert len(metrics) == 2
        first = metrics[0]["metrics"]["targets"][0]
        assert first["level"] == "coarse"
        assert first["coarse_t_ms"] == 1000 and first["fine_t_ms"] is None
        assert first["distance_m"] == pytest.approx(0.25, abs=1e-9)
        second = metrics[1]["metrics"]["targets"][0]
        assert second["level"] == "fine"
        assert second["coarse_t_ms"] == 1000 and second["fine_t_ms"] == 2000

    def test_no_event_without_improvement(self, task):
        captured = events_of(task)
        x, y, z = GOAL_POS
        self.move(task, 1000, x, y, z)
        self.move(task, 2000, x, y, z)
        assert len([e for e in captured if e["type"] == "event.metrics"]) == 1

    def test_hand_travel_freezes_after_fine(self, task):
        task.ingest({"type": "hand", "t_ms": 1, "left": [0, 1, 0]})
        task.ingest({"type": "hand", "t_ms": 2, "left": [0, 1, 1]})
        assert task.metrics.hand_distance_m == pytest.approx(1.0)
        self.move(task, 3, *GOAL_POS)
        task.ingest({"type": "hand", "t_ms": 4, "left": [5, 1, 1]})
        assert task.metrics.hand_distance_m == pytest.approx(1.0)

    def test_both_hands_accumulate(self, task):
        task.ingest({"type": "hand", "t_ms": 1,
                     "left": [0, 0, 0], "right": [1, 0, 0]})
        task.ingest({"type": "hand", "t_ms": 2,
                     "left": [0, 0, 1], "right": [1, 0, 2]})
        assert task.metrics.hand_distance_m == pytest.approx(3.0)

    def test_report_shape(self, task):
        report = task.metrics_report()
        assert set(report) == {"revision", "targets", "hand_distance_m",
                               "first_action_latency_ms"}
        target = report["targets"][0]
        assert target["prefab_id"] == "Chair" and target["index"] == 0
        assert target["level"] == "none"
        assert target["distance_m"] > 0.30


def drive_mover(session):
    session.ingest({"type": "pose", "t_ms": 50, "position": [4.49, 1.65, 4.39],
                    "forward": [0, 0, 1], "right": [1, 0, 0]})
    session.ingest({"type": "word", "t_ms": 100, "text": "move",
                    "start_ms": 100, "end_ms": 250})
    session.ingest({"type": "word", "t_ms": 300, "text": "it",
                    "start_ms": 300, "end_ms": 450})
    session.ingest({"type": "point", "t_ms": 400, "target": "Floor",
                    "position": [5.0, 0.0, 5.0], "normal": [0, 1, 0]})
    end = {"object": "Floor", "position": [1.0, 0.0, 1.0], "normal": [0, 1, 0]}
    session.ingest({"type": "line", "t_ms": 420, "start_ms": 410,
                    "duration_ms": 40, "start": end, "end": end})
    session.ingest({"type": "hand", "t_ms": 450, "left": [0, 1, 0]})
    session.ingest({"type": "hand", "t_ms": 460, "left": [0, 1, 2]})
    session.ingest({"type": "finalize", "t_ms": 500})
    session.ingest({"type": "apply", "t_ms": 600,
                    "line": 'SCALE("-23780", 2.00, 2.00, 2.00);'})


class TestRecordReplay:
    @pytest.fixture
    def recorded(self, match_all, tmp_path):
        trace = tmp_path / "trace.jsonl"
        s = Session(mover_config(match_all),
                    recorder=TraceRecorder.to_path(trace))
        drive_mover(s)
        s.close()
        return s, trace

    def test_recorder_mirrors_log(self, recorded):
        session, trace = recorded
        assert trace.read_text().splitlines() == session.log

    def test_replay_is_byte_identical(self, recorded):
        session, trace = recorded
        result = replay_trace(trace, verify=True)
        assert result.log == session.log
        assert result.scene.to_json() == session.scene.to_json()
        assert result.metrics == session.metrics_report()

    def test_replay_reemits_events(self, recorded):
        _, trace = recorded
        result = replay_trace(trace, verify=True)
        kinds = [e["type"] for e in result.events]
        assert "event.revision" in kinds and "event.stream_end" in kinds

    def test_tampered_response_diverges(self, recorded):
        _, trace = recorded
        lines = trace.read_text().splitlines()
        i = next(i for i, l in enumerate(lines)
                 if json.loads(l)["type"] == "llm_response")
        doc = json.loads(lines[i])
        doc["text"] = doc["text"].replace("5.00", "6.00", 1)
        lines[i] = json.dumps(doc)
        trace.write_text("\n".join(lines) + "\n")
        with pytest.raises(DivergenceError) as err:
            replay_trace(trace, verify=True)
        assert err.value.line_no >= i + 1

    def test_tampered_replay_without_verify(self, recorded):
        _, trace = recorded
        lines = trace.read_text().splitlines()
        i = next(i for i, l in enumerate(lines)
                 if json.loads(l)["type"] == "llm_response")
        doc = json.loads(lines[i])
        doc["text"] = 'MOVE("-23780", 9.00, 0.67, 9.00);'
        lines[i] = json.dumps(doc)
        trace.write_text("\n".join(lines) + "\n")
        result = replay_trace(trace, verify=False)
        assert result.scene.get("-23780").position.x == pytest.approx(9.0)

    def test_truncated_trace_diverges(self, recorded):
        _, trace = recorded
        lines = trace.read_text().splitlines()
        trace.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(DivergenceError):
            replay_trace(trace, verify=True)

    def test_error_trace_replays(self, script_file, tmp_path):
        script = script_file([{"match": "zebra", "response": "MESSAGE(\"x\");"}])
        trace = tmp_path / "err.jsonl"
        s = Session(mover_config(script), recorder=TraceRecorder.to_path(trace))
        s.ingest({"type": "word", "t_ms": 100, "text": "hello",
                  "start_ms": 100, "end_ms": 200})
        s.ingest({"type": "finalize", "t_ms": 500})
        s.close()
        result = replay_trace(trace, verify=True)
        warn = [e for e in result.events if e["type"] == "event.warning"]
        assert warn[0]["reason"] == "provider:no_script_match"

    def test_replay_accepts_line_list(self, recorded):
        session, _ = recorded
        result = replay_trace(list(session.log), verify=True)
        assert result.log == session.log


class TestReadTrace:
    def test_empty(self):
        with pytest.raises(TraceFormatError, match="empty"):
            read_trace([])

    def test_blank_line(self):
        with pytest.raises(TraceFormatError, match="blank"):
            read_trace(['{"type": "header", "config": {}, "scene": {}}', ""])

    def test_bad_json(self):
        with pytest.raises(TraceFormatError, match="not valid JSON"):
            read_trace(['{"type": "header"', ])

    def test_header_first(self):
        with pytest.raises(TraceFormatError, match="header"):
            read_trace(['{"type": "word", "t_ms": 1}'])

    def test_header_needs_config_and_scene(self):
        with pytest.raises(TraceFormatError, match="config and scene"):
            read_trace(['{"type": "header", "version": 1}'])
