"""Session orchestration: ingest events in, scene edits and events out.

One session owns a scene, a capture accumulator, a provider connection,
and the metric counters. Every externally visible effect is a pure
function of the ingest event stream, which is what makes traces replayable
byte-for-byte: a trace is the header (config + initial scene) followed by
every ingest event and every derived record (request payload, raw
response, per-line outcomes) in order.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, IO, Iterable

from .capture import (
    CaptureAccumulator,
    CaptureConfig,
    HeadSample,
    LineCue,
    LineEnd,
    PointCue,
    TimedWord,
    build_user_prompt,
    should_send,
)
from .gateway import (
    ContextWindow,
    GatewayError,
    GatewayTimeout,
    MockProvider,
    NoScriptMatch,
    OpenAIChatProvider,
    ProviderConfig,
    ProviderError,
    TransportError,
    load_oneshot,
    load_prompt_template,
    render_system_prompt,
)
from .geometry import Vec3, avg_corner_distance
from .runtime import (
    APPLIED,
    AliasState,
    DEBUG,
    ExecContext,
    ExecutionReport,
    MESSAGE,
    Outcome,
    PlayerPose,
    SKIPPED,
    execute_stream,
    run_line,
)
from .scene import Scene, TargetSpec, load_bundled_scene, load_scene, scene_from_doc
from .voice import (
    NoMatch,
    PointAnchor,
    SelectionState,
    apply_command,
    normalize,
    parse_command,
)

MODES = ("control", "voice", "mover")
TASKS = ("task1a", "task1b", "sandbox")

FINE_LIMIT_M = 0.12
COARSE_LIMIT_M = 0.30


class ConfigError(ValueError):
    pass


class IngestError(ValueError):
    """Malformed ingest event; the connection that sent it is at fault."""


class TraceFormatError(Exception):
    pass


class DivergenceError(Exception):
    """Replay produced different bytes than the recorded trace."""

    def __init__(self, line_no: int, expected: str, actual: str) -> None:
        super().__init__(
            f"trace diverges at line {line_no}:\n"
            f"  recorded: {expected[:200]}\n"
            f"  replayed: {actual[:200]}")
        self.line_no = line_no


@dataclass(frozen=True)
class SessionConfig:
    mode: str = "mover"
    task: str = "sandbox"
    scene: str = "sandbox"          # bundled scene name or a file path
    debug_explain: bool = False
    capture: CaptureConfig = field(default_factory=CaptureConfig)
    provider: ProviderConfig | None = None
    mock_script: str | None = None
    measure_latency: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.mode in ("mover", "voice") and self.provider is None \
                and self.mock_script is None:
            raise ConfigError(f"{self.mode} mode needs a provider or a mock script")

    @property
    def allow_create_delete(self) -> bool:
        return self.task == "sandbox"

    @property
    def prompt_task(self) -> str:
        return "task2" if self.task == "sandbox" else "task1"

    def to_doc(self) -> dict[str, Any]:
        cap = self.capture
        doc: dict[str, Any] = {
            "mode": self.mode,
            "task": self.task,
            "scene": self.scene,
            "debug_explain": self.debug_explain,
            "capture": {
                "angle_threshold_deg": cap.angle_threshold_deg,
                "min_duration_ms": cap.min_duration_ms,
                "fov_h_deg": cap.fov_h_deg,
                "fov_v_deg": cap.fov_v_deg,
                "score_scale": cap.score_scale,
                "silent_preroll_ms": cap.silent_preroll_ms,
            },
            "provider": None,
            "mock_script": self.mock_script,
        }
        if self.provider is not None:
            doc["provider"] = {
                "base_url": self.provider.base_url,
                "model": self.provider.model,
                "api_key_env": self.provider.api_key_env,
                "temperature": self.provider.temperature,
                "top_p": self.provider.top_p,
                "seed": self.provider.seed,
                "timeout_s": self.provider.timeout_s,
            }
        return doc

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "SessionConfig":
        cap = doc.get("capture", {})
        provider = None
        if doc.get("provider"):
            provider = ProviderConfig(**doc["provider"])
        return cls(
            mode=doc.get("mode", "mover"),
            task=doc.get("task", "sandbox"),
            scene=doc.get("scene", "sandbox"),
            debug_explain=bool(doc.get("debug_explain", False)),
            capture=CaptureConfig(**cap) if cap else CaptureConfig(),
            provider=provider,
            mock_script=doc.get("mock_script"),
        )


def resolve_scene(spec: str) -> Scene:
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return load_scene(path)
    return load_bundled_scene(spec)


def check_target(distance_m: float) -> str:
    """Map an average-corner distance to an attainment level.

    Strict comparisons: exactly 0.12 is only coarse, exactly 0.30 is none.
    """
    if distance_m < FINE_LIMIT_M:
        return "fine"
    if distance_m < COARSE_LIMIT_M:
        return "coarse"
    return "none"


@dataclass
class TargetState:
    spec: TargetSpec
    coarse_t_ms: int | None = None
    fine_t_ms: int | None = None

    def to_doc(self, level: str, distance: float | None) -> dict[str, Any]:
        return {
            "prefab_id": self.spec.prefab_id,
            "index": self.spec.index,
            "level": level,
            "distance_m": distance,
            "coarse_t_ms": self.coarse_t_ms,
            "fine_t_ms": self.fine_t_ms,
        }


class Metrics:
    """Target attainment, accumulated hand travel, first-action latency."""

    def __init__(self, targets: Iterable[TargetSpec]) -> None:
        self.targets = [TargetState(t) for t in targets]
        self.hand_distance_m = 0.0
        self.latency_ms: list[float] = []
        self._prev_hands: dict[str, Vec3] = {}

    def _bound_object(self, scene: Scene, spec: TargetSpec):
        matching = scene.find_by_prefab(spec.prefab_id)
        return matching[spec.index] if spec.index < len(matching) else None

    def evaluate(self, scene: Scene, t_ms: int) -> bool:
        """Re-check every target; returns True when any level improved."""
        changed = False
        for state in self.targets:
            obj = self._bound_object(scene, state.spec)
            if obj is None:
                continue
            level = check_target(avg_corner_distance(obj.boundary, state.spec.goal))
            if level in ("coarse", "fine") and state.coarse_t_ms is None:
                state.coarse_t_ms = t_ms
                changed = True
            if level == "fine" and state.fine_t_ms is None:
                state.fine_t_ms = t_ms
                changed = True
        return changed

    @property
    def all_fine(self) -> bool:
        return bool(self.targets) and all(t.fine_t_ms is not None for t in self.targets)

    def track_hands(self, hands: dict[str, Vec3]) -> None:
        """Accumulate hand travel; frozen once every target is fine."""
        frozen = self.all_fine
        for name, pos in hands.items():
            prev = self._prev_hands.get(name)
            if prev is not None and not frozen:
                self.hand_distance_m += pos.distance(prev)
            self._prev_hands[name] = pos

    def report(self, scene: Scene) -> dict[str, Any]:
        targets = []
        for state in self.targets:
            obj = self._bound_object(scene, state.spec)
            if obj is None:
                targets.append(state.to_doc("unbound", None))
            else:
                d = avg_corner_distance(obj.boundary, state.spec.goal)
                targets.append(state.to_doc(check_target(d), d))
        return {
            "revision": scene.revision,
            "targets": targets,
            "hand_distance_m": self.hand_distance_m,
            "first_action_latency_ms": self.latency_ms,
        }


class TraceRecorder:
    """Writes one JSON document per line to a file or any text sink."""

    def __init__(self, sink: IO[str]) -> None:
        self.sink = sink

    @classmethod
    def to_path(cls, path: str | Path) -> "TraceRecorder":
        return cls(open(path, "w", encoding="utf-8"))

    def write(self, doc: dict[str, Any]) -> None:
        self.sink.write(json.dumps(doc) + "\n")
        self.sink.flush()

    def close(self) -> None:
        self.sink.close()


def _vec(doc: Any, what: str) -> Vec3:
    if not (isinstance(doc, (list, tuple)) and len(doc) == 3):
        raise IngestError(f"{what} must be a [x, y, z] triple")
    try:
        return Vec3(float(doc[0]), float(doc[1]), float(doc[2]))
    except (TypeError, ValueError) as exc:
        raise IngestError(f"{what} has a non-numeric component") from exc


def _line_end(doc: Any, what: str) -> LineEnd:
    if not isinstance(doc, dict):
        raise IngestError(f"{what} must be an object")
    return LineEnd(
        target=str(doc.get("object", "")),
        position=_vec(doc.get("position"), f"{what}.position"),
        normal=_vec(doc.get("normal"), f"{what}.normal"),
    )


EventCallback = Callable[[dict[str, Any]], None]

INGEST_TYPES = ("word", "pose", "point", "line", "select", "hand",
                "finalize", "apply")


class Session:
    """Single-threaded session core; callers serialize access."""

    def __init__(self, config: SessionConfig, scene: Scene | None = None,
                 provider: Any = None,
                 recorder: TraceRecorder | None = None) -> None:
        self.config = config
        self.scene = scene if scene is not None else resolve_scene(config.scene)
        self.alias = AliasState()
        self.selection = SelectionState()
        self.accumulator = CaptureAccumulator(config.capture)
        self.metrics = Metrics(self.scene.targets)
        self.player: PlayerPose | None = None
        self.clock_ms = 0
        self.recorder = recorder
        self._subscribers: list[EventCallback] = []
        self._staged: list[dict[str, Any]] | None = None
        self.log: list[str] = []        # regenerated trace lines, header included
        self.provider = provider or self._build_provider()
        self.window = self._build_window() if self.provider is not None else None
        self._write({"type": "header", "version": 1,
                     "config": config.to_doc(),
                     "scene": self.scene.to_file_doc()})

    def _build_provider(self) -> Any:
        if self.config.mock_script is not None:
            return MockProvider.from_file(self.config.mock_script)
        if self.config.provider is not None:
            return OpenAIChatProvider(self.config.provider)
        return None

    def _build_window(self) -> ContextWindow:
        template = load_prompt_template(self.config.prompt_task)
        system = render_system_prompt(template, self.scene)
        shot_user, shot_assistant = load_oneshot()
        return ContextWindow(system, shot_user, shot_assistant)

    # -- event plumbing ----------------------------------------------------

    def subscribe(self, callback: EventCallback) -> None:
        self._subscribers.append(callback)

    def _emit(self, event: dict[str, Any]) -> None:
        for callback in self._subscribers:
            callback(event)

    def _write(self, doc: dict[str, Any]) -> None:
        # While an ingest event is being validated, derived records are
        # staged; nothing lands in the trace unless the event goes through.
        if self._staged is not None:
            self._staged.append(doc)
        else:
            self._write_now(doc)

    def _write_now(self, doc: dict[str, Any]) -> None:
        line = json.dumps(doc)
        self.log.append(line)
        if self.recorder is not None:
            self.recorder.write(doc)

    def _warn(self, reason: str, detail: str = "") -> None:
        doc: dict[str, Any] = {"type": "warning", "t_ms": self.clock_ms,
                               "reason": reason}
        if detail:
            doc["detail"] = detail
        self._write(doc)
        self._emit({"type": "event.warning", "t_ms": self.clock_ms,
                    "reason": reason, "detail": detail})

    # -- ingest --------------------------------------------------------------

    def ingest(self, doc: dict[str, Any]) -> None:
        """Feed one event. Raises IngestError on malformed input; every
        other failure surfaces as warning events, never exceptions."""
        if not isinstance(doc, dict):
            raise IngestError("event must be a JSON object")
        etype = doc.get("type")
        if etype not in INGEST_TYPES:
            raise IngestError(f"unknown event type {etype!r}")
        if not isinstance(doc.get("t_ms"), (int, float)):
            raise IngestError("event needs a numeric t_ms")
        self.clock_ms = int(doc["t_ms"])
        self._staged = []
        try:
            getattr(self, f"_on_{etype}")(doc)
        except BaseException:
            self._staged = None
            raise
        staged = self._staged
        self._staged = None
        self._write_now(doc)
        for entry in staged:
            self._write_now(entry)

    def _on_word(self, doc: dict[str, Any]) -> None:
        if not isinstance(doc.get("text"), str) or not doc["text"]:
            raise IngestError("word event needs non-empty text")
        start = int(doc.get("start_ms", doc["t_ms"]))
        end = int(doc.get("end_ms", doc["t_ms"]))
        self.accumulator.add_word(TimedWord(doc["text"], start, end))

    def _on_pose(self, doc: dict[str, Any]) -> None:
        sample = HeadSample(
            t_ms=int(doc["t_ms"]),
            position=_vec(doc.get("position"), "pose.position"),
            forward=_vec(doc.get("forward"), "pose.forward"),
            right=_vec(doc.get("right"), "pose.right"),
        )
        self.accumulator.add_pose(sample)
        self.player = PlayerPose(sample.position, sample.forward, sample.right)

    def _on_point(self, doc: dict[str, Any]) -> None:
        position = _vec(doc.get("position"), "point.position")
        normal = _vec(doc.get("normal"), "point.normal")
        cue = PointCue(
            hit_id=self.accumulator.next_hit_id(),
            t_ms=int(doc["t_ms"]),
            target=str(doc.get("target", "")),
            position=position,
            normal=normal,
        )
        self.accumulator.add_point(cue)
        self.selection.last_point = PointAnchor(cue.position)
        self._emit({"type": "event.cue", "t_ms": self.clock_ms,
                    "cue_id": cue.hit_id, "kind": "point"})

    def _on_line(self, doc: dict[str, Any]) -> None:
        start = _line_end(doc.get("start"), "line.start")
        end = _line_end(doc.get("end"), "line.end")
        project = _line_end(doc.get("project", doc.get("start")), "line.project")
        cue = LineCue(
            line_id=self.accumulator.next_line_id(),
            start_ms=int(doc.get("start_ms", doc["t_ms"])),
            duration_ms=int(doc.get("duration_ms", 0)),
            start=start,
            end=end,
            project=project,
        )
        self.accumulator.add_line(cue)
        self._emit({"type": "event.cue", "t_ms": self.clock_ms,
                    "cue_id": cue.line_id, "kind": "line"})

    def _on_select(self, doc: dict[str, Any]) -> None:
        ids = doc.get("ids")
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise IngestError("select event needs a list of object id strings")
        self.selection.selected = list(ids)

    def _on_hand(self, doc: dict[str, Any]) -> None:
        hands: dict[str, Vec3] = {}
        for side in ("left", "right"):
            if side in doc:
                hands[side] = _vec(doc[side], f"hand.{side}")
        if not hands:
            raise IngestError("hand event needs a left and/or right position")
        self.metrics.track_hands(hands)

    def _on_apply(self, doc: dict[str, Any]) -> None:
        """Direct-manipulation channel: one API line outside any exchange."""
        line = doc.get("line")
        if not isinstance(line, str):
            raise IngestError("apply event needs a line string")
        outcome = run_line(line, self.scene, self.alias, self._exec_context())
        self._write({"type": "outcomes", "t_ms": self.clock_ms,
                     "entries": [outcome.to_doc()]})
        self._emit_outcome(outcome)
        self._after_edits()

    def _on_finalize(self, doc: dict[str, Any]) -> None:
        display_text = doc.get("display_text")
        if display_text is not None and not isinstance(display_text, str):
            raise IngestError("display_text must be a string")
        acc = self.accumulator
        try:
            if self.config.mode == "control":
                self._warn("instructions_ignored",
                           "control mode has no instruction channel")
            elif self.config.mode == "voice":
                self._finalize_voice(acc.transcript())
            else:
                self._finalize_mover(display_text)
        finally:
            acc.reset()

    # -- finalize paths ------------------------------------------------------

    def _exec_context(self) -> ExecContext:
        player = self.player or PlayerPose.default_for(self.scene)
        return ExecContext(player=player,
                           allow_create_delete=self.config.allow_create_delete)

    def _finalize_voice(self, transcript: str) -> None:
        if not should_send(transcript):
            self._warn("interjection_only", "nothing to do")
            return
        try:
            cmd = parse_command(normalize(transcript), self.scene, self.selection)
        except NoMatch as exc:
            self._warn(f"no_match:{exc.reason}", str(exc))
            return
        outcomes = apply_command(cmd, self.scene, self.selection,
                                 self._exec_context(), self.alias)
        self._write({"type": "outcomes", "t_ms": self.clock_ms,
                     "entries": [o.to_doc() for o in outcomes]})
        for outcome in outcomes:
            self._emit_outcome(outcome)
        self._after_edits()

    def _finalize_mover(self, display_text: str | None) -> None:
        acc = self.accumulator
        transcript = acc.transcript() if acc.words else (display_text or "")
        if not should_send(transcript):
            self._warn("interjection_only", "request not sent")
            return
        payload = build_user_prompt(
            self.scene,
            HeadSample(self.clock_ms, *self._player_triplet()),
            acc.words, acc.poses, acc.points, acc.lines,
            config=self.config.capture,
            allow_create_delete=self.config.allow_create_delete,
            debug_explain=self.config.debug_explain,
            display_text=display_text,
        )
        request = payload.to_json()
        self._write({"type": "llm_request", "t_ms": self.clock_ms,
                     "payload": request})
        assert self.window is not None
        messages = self.window.messages_for(request)

        seen: list[str] = []
        send_wall = time.monotonic()
        first_applied_wall: list[float] = []

        def tap(lines: Iterable[str]) -> Iterable[str]:
            for line in lines:
                seen.append(line)
                yield line

        def on_outcome(outcome: Outcome) -> None:
            if outcome.status == APPLIED and not first_applied_wall:
                first_applied_wall.append(time.monotonic())
            self._emit_outcome(outcome)

        error_doc = None
        try:
            stream = self.provider.stream_lines(messages)
            report = execute_stream(tap(stream), self.scene, self.alias,
                                    self._exec_context(), on_outcome=on_outcome)
        except GatewayError as exc:
            report = ExecutionReport()
            report.error = exc
        if report.error is not None:
            error_doc = {"kind": _error_kind(report.error),
                         "message": str(report.error)}
        if self.config.measure_latency and first_applied_wall:
            self.metrics.latency_ms.append(
                (first_applied_wall[0] - send_wall) * 1000.0)

        self._write({"type": "llm_response", "t_ms": self.clock_ms,
                     "text": "\n".join(seen), "error": error_doc})
        self._write({"type": "outcomes", "t_ms": self.clock_ms,
                     "entries": [o.to_doc() for o in report.outcomes]})
        self.window.commit_exchange(request, "\n".join(report.successful_lines()))
        if error_doc is not None:
            self._warn(f"provider:{error_doc['kind']}", error_doc["message"])
        applied = len(report.applied())
        skipped = sum(1 for o in report.outcomes if o.status == SKIPPED)
        self._after_edits()
        self._emit({"type": "event.stream_end", "t_ms": self.clock_ms,
                    "applied": applied, "skipped": skipped, "error": error_doc})

    def _player_triplet(self) -> tuple[Vec3, Vec3, Vec3]:
        player = self.player or PlayerPose.default_for(self.scene)
        return player.position, player.forward, player.right

    def _emit_outcome(self, outcome: Outcome) -> None:
        if outcome.status == APPLIED:
            self._emit({"type": "event.revision", "t_ms": self.clock_ms,
                        "revision": outcome.revision, "line": outcome.line,
                        "objects": self.scene.objects_doc()})
        elif outcome.status == MESSAGE:
            self._emit({"type": "event.message", "t_ms": self.clock_ms,
                        "content": outcome.content, "debug": False})
        elif outcome.status == DEBUG:
            self._emit({"type": "event.message", "t_ms": self.clock_ms,
                        "content": outcome.content, "debug": True})
        else:
            self._emit({"type": "event.warning", "t_ms": self.clock_ms,
                        "reason": "line_skipped", "detail": outcome.reason,
                        "line": outcome.line})

    def _after_edits(self) -> None:
        if self.metrics.evaluate(self.scene, self.clock_ms):
            self._emit({"type": "event.metrics", "t_ms": self.clock_ms,
                        "metrics": self.metrics.report(self.scene)})

    # -- results ---------------------------------------------------------------

    def metrics_report(self) -> dict[str, Any]:
        return self.metrics.report(self.scene)

    def close(self) -> None:
        if self.recorder is not None:
            self.recorder.close()


def _error_kind(exc: Exception) -> str:
    if isinstance(exc, _ReplayedFailure):
        return exc.kind
    if isinstance(exc, GatewayTimeout):
        return "timeout"
    if isinstance(exc, ProviderError):
        return "provider_error"
    if isinstance(exc, NoScriptMatch):
        return "no_script_match"
    if isinstance(exc, TransportError):
        return "transport_error"
    if isinstance(exc, GatewayError):
        return "gateway_error"
    return "error"


# -- trace replay -------------------------------------------------------------


def read_trace(path_or_lines: str | Path | list[str]) -> tuple[dict[str, Any], list[dict[str, Any]], list[str]]:
    """Parse a trace into (header, events, raw_lines). TraceFormatError on
    anything that is not well-formed JSONL with a leading header."""
    if isinstance(path_or_lines, (str, Path)):
        text = Path(path_or_lines).read_text(encoding="utf-8")
        lines = text.splitlines()
    else:
        lines = [l.rstrip("\n") for l in path_or_lines]
    if not lines:
        raise TraceFormatError("trace is empty")
    docs = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            raise TraceFormatError(f"blank line {i} in trace")
        try:
            docs.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {i} is not valid JSON: {exc}") from exc
    header, events = docs[0], docs[1:]
    if header.get("type") != "header":
        raise TraceFormatError("first line must be the header")
    if "config" not in header or "scene" not in header:
        raise TraceFormatError("header needs config and scene")
    return header, events, lines


@dataclass
class ReplayResult:
    scene: Scene
    metrics: dict[str, Any]
    log: list[str]
    events: list[dict[str, Any]] = field(default_factory=list)


def replay_trace(path_or_lines: str | Path | list[str],
                 verify: bool = True) -> ReplayResult:
    """Re-run a trace deterministically.

    The recorded provider responses are fed back in order; all derived
    records are regenerated. With `verify`, any byte difference between
    the regenerated log and the recorded trace raises DivergenceError.
    """
    header, events, lines = read_trace(path_or_lines)
    config = SessionConfig.from_doc(header["config"])
    scene = scene_from_doc(header["scene"])

    responses = []
    for doc in events:
        if doc.get("type") == "llm_response":
            err = doc.get("error") or {}
            responses.append({"text": doc.get("text", ""),
                              "error": err.get("kind"),
                              "message": err.get("message", "")})
    provider = _StrictReplayProvider(responses)

    session = Session(config, scene=scene, provider=provider)
    captured: list[dict[str, Any]] = []
    session.subscribe(captured.append)
    for doc in events:
        if doc.get("type") in INGEST_TYPES:
            session.ingest(doc)
    if verify:
        for i, (expected, actual) in enumerate(zip(lines, session.log), start=1):
            if expected != actual:
                raise DivergenceError(i, expected, actual)
        if len(lines) != len(session.log):
            raise DivergenceError(min(len(lines), len(session.log)) + 1,
                                  "<different trace length>",
                                  f"{len(session.log)} lines vs {len(lines)}")
    return ReplayResult(scene=session.scene, metrics=session.metrics_report(),
                        log=session.log, events=captured)


class _StrictReplayProvider:
    """ReplayProvider that also re-raises recorded provider failures."""

    def __init__(self, responses: list[dict[str, Any]]) -> None:
        self.responses = responses
        self.cursor = 0

    def stream_lines(self, messages: list[Any]):
        if self.cursor >= len(self.responses):
            raise GatewayError("replay ran out of recorded responses")
        entry = self.responses[self.cursor]
        self.cursor += 1
        return self._stream(entry)

    def _stream(self, entry: dict[str, Any]):
        text = entry["text"]
        if text:
            yield from text.split("\n")
        kind = entry.get("error")
        if kind:
            raise _ReplayedFailure(kind, entry.get("message") or f"replayed {kind}")


class _ReplayedFailure(GatewayError):
    """Recorded provider failure, re-raised with its original kind and text
    so the regenerated trace matches the recorded one byte for byte."""

    def __init__(self, kind: str, message: str) -> None:
        super().__init__(message)
        self.kind = kind
