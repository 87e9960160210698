"""Line-wise API call runtime.

The model replies with one call per line, e.g.

    CREATE("Chair");
    MOVE("crt", 5.00, 0.05, 5.75);
    LOOKAT("crt", x=5.00, z=5.00);

Each line is parsed and executed independently as it arrives. A bad line
is skipped with a reason and execution continues; only applied lines bump
the scene revision. "crt" names the most recently targeted object.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator

from .geometry import Vec3
from .scene import ANCHOR_BACK_CENTER, Scene, SceneError

# Outcome statuses
APPLIED = "applied"
SKIPPED = "skipped"
MESSAGE = "message"
DEBUG = "debug"

API_NAMES = ("CREATE", "MOVE", "FORWARD", "LOOKAT", "SCALE", "DELETE", "MESSAGE", "EXPLAIN")

# How far ahead of the player a fresh object lands, in meters.
SPAWN_DISTANCE = 1.5


class ParseError(Exception):
    def __init__(self, reason: str, offset: int) -> None:
        super().__init__(f"{reason} (at offset {offset})")
        self.reason = reason
        self.offset = offset


@dataclass(frozen=True)
class ApiCall:
    name: str
    positional: tuple[Any, ...]
    named: tuple[tuple[str, Any], ...]
    raw_line: str

    def named_map(self) -> dict[str, Any]:
        return dict(self.named)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),;=])
    """,
    re.VERBOSE,
)

_STRING_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def _unescape(body: str) -> str:
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_STRING_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _tokenize(text: str) -> list[tuple[str, Any, int]]:
    tokens: list[tuple[str, Any, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            raw = m.group()
            if kind == "string":
                value: Any = _unescape(raw[1:-1])
            elif kind == "number":
                value = float(raw)
            else:
                value = raw
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def is_comment(text: str) -> bool:
    s = text.strip()
    return not s or s.startswith("#") or s.startswith("//")


def parse_line(text: str) -> ApiCall | None:
    """Parse one response line into an ApiCall.

    Returns None for blank and comment lines. Raises ParseError (with a
    byte offset) on anything else that is not a well-formed call:
    IDENT '(' [arg {',' arg}] ')' [';'] where an arg is a string, a
    number, null, or x/y/z '=' value.
    """
    if is_comment(text):
        return None
    tokens = _tokenize(text)
    ti = 0

    def peek() -> tuple[str, Any, int]:
        return tokens[ti]

    def take(kind: str, what: str) -> tuple[str, Any, int]:
        nonlocal ti
        tok = tokens[ti]
        if tok[0] != kind:
            raise ParseError(f"expected {what}", tok[2])
        ti += 1
        return tok

    _, name, _off = take("ident", "a call name")
    tok = take("punct", "'('")
    if tok[1] != "(":
        raise ParseError("expected '('", tok[2])

    positional: list[Any] = []
    named: list[tuple[str, Any]] = []

    def parse_value() -> Any:
        nonlocal ti
        kind, value, off = peek()
        if kind == "string" or kind == "number":
            ti += 1
            return value
        if kind == "ident" and value == "null":
            ti += 1
            return None
        raise ParseError("expected a string, number, or null", off)

    kind, value, off = peek()
    if not (kind == "punct" and value == ")"):
        while True:
            kind, value, off = peek()
            if kind == "ident" and value != "null":
                key = value
                ti += 1
                tok = take("punct", "'=' after a named key")
                if tok[1] != "=":
                    raise ParseError("expected '=' after a named key", tok[2])
                if key not in ("x", "y", "z"):
                    raise ParseError(f"unknown named argument {key!r}", off)
                if any(k == key for k, _ in named):
                    raise ParseError(f"duplicate named argument {key!r}", off)
                named.append((key, parse_value()))
            else:
                if named:
                    raise ParseError("positional argument after a named one", off)
                positional.append(parse_value())
            kind, value, off = peek()
            if kind == "punct" and value == ",":
                ti += 1
                continue
            break
    tok = peek()
    if not (tok[0] == "punct" and tok[1] == ")"):
        raise ParseError("expected ')'", tok[2])
    ti += 1
    tok = peek()
    if tok[0] == "punct" and tok[1] == ";":
        ti += 1
        tok = peek()
    if tok[0] != "end":
        raise ParseError("trailing characters after the call", tok[2])
    return ApiCall(name=name, positional=tuple(positional),
                   named=tuple(named), raw_line=text)


@dataclass(frozen=True)
class PlayerPose:
    position: Vec3
    forward: Vec3
    right: Vec3

    @classmethod
    def default_for(cls, scene: Scene) -> "PlayerPose":
        c = scene.room.center
        return cls(position=Vec3(c.x, c.y + 1.60, c.z),
                   forward=Vec3(0.0, 0.0, 1.0), right=Vec3(1.0, 0.0, 0.0))


@dataclass
class AliasState:
    """Tracks what "crt" currently resolves to."""

    crt: str | None = None

    def retarget(self, object_id: str) -> None:
        self.crt = object_id

    def forget(self, object_id: str) -> None:
        if self.crt == object_id:
            self.crt = None


@dataclass
class ExecContext:
    player: PlayerPose
    allow_create_delete: bool = True


@dataclass(frozen=True)
class Outcome:
    line: str
    status: str
    reason: str = ""
    content: str = ""
    revision: int | None = None

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"line": self.line, "status": self.status}
        if self.reason:
            doc["reason"] = self.reason
        if self.content:
            doc["content"] = self.content
        if self.revision is not None:
            doc["revision"] = self.revision
        return doc


def _skip(line: str, reason: str) -> Outcome:
    return Outcome(line=line, status=SKIPPED, reason=reason)


def _resolve(scene: Scene, alias: AliasState, ref: Any):
    """Map an id argument to a scene object: "crt", an object_id, or a
    unique display name. Returns (object, error_reason)."""
    if not isinstance(ref, str):
        return None, "object reference must be a string"
    if ref == "crt":
        if alias.crt is None:
            return None, "crt is not bound to any object"
        obj = scene.get(alias.crt)
        if obj is None:
            return None, "crt refers to a deleted object"
        return obj, ""
    obj = scene.get(ref)
    if obj is not None:
        return obj, ""
    named = scene.find_by_name(ref)
    if len(named) == 1:
        return named[0], ""
    if len(named) > 1:
        return None, f"name {ref!r} is ambiguous"
    return None, f"no object {ref!r}"


def _components(call: ApiCall, arity_name: str, nullable: bool,
                default: Any) -> "tuple[dict[str, Any], str]":
    """Merge positional x,y,z and named args into a component map."""
    out: dict[str, Any] = {"x": default, "y": default, "z": default}
    keys = ("x", "y", "z")
    extra = call.positional[1:]
    if len(extra) > 3:
        return out, f"{arity_name} takes at most 3 coordinates"
    given = set()
    for key, value in zip(keys, extra):
        if value is not None and not isinstance(value, float):
            return out, f"{key} must be a number or null"
        out[key] = value if value is not None else (None if nullable else default)
        given.add(key)
    for key, value in call.named:
        if key in given:
            return out, f"duplicate argument {key!r}"
        if value is not None and not isinstance(value, float):
            return out, f"{key} must be a number or null"
        out[key] = value
        given.add(key)
    if not nullable:
        for key in keys:
            if out[key] is None:
                out[key] = default
    return out, ""


def execute(call: ApiCall, scene: Scene, alias: AliasState,
            ctx: ExecContext) -> Outcome:
    """Run one parsed call against the scene.

    Applied calls bump the revision; every failure mode is a skip with a
    reason, never an exception.
    """
    line = call.raw_line
    handler = _HANDLERS.get(call.name)
    if handler is None:
        return _skip(line, f"unknown call {call.name!r}")
    return handler(call, scene, alias, ctx)


def _applied(scene: Scene, line: str) -> Outcome:
    return Outcome(line=line, status=APPLIED, revision=scene.bump_revision())


def _exec_create(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if not ctx.allow_create_delete:
        return _skip(line, "CREATE is disabled in this task")
    if call.named or len(call.positional) != 1 or not isinstance(call.positional[0], str):
        return _skip(line, "CREATE takes a single prefab id string")
    prefab_id = call.positional[0]
    if prefab_id not in scene.prefabs:
        return _skip(line, f"unknown prefab {prefab_id!r}")
    position, facing = spawn_pose(scene, ctx.player)
    obj = scene.spawn(prefab_id, position, facing)
    alias.retarget(obj.object_id)
    return _applied(scene, line)


def spawn_pose(scene: Scene, player: PlayerPose) -> tuple[Vec3, Vec3]:
    """Where a fresh object appears: on the floor, a fixed distance along
    the player's horizontal gaze, turned to face the player."""
    flat = player.forward.horizontal()
    if flat.is_zero(1e-9):
        flat = Vec3(0.0, 0.0, 1.0)
    ahead = flat.normalized()
    position = Vec3(
        player.position.x + ahead.x * SPAWN_DISTANCE,
        scene.room.floor_y,
        player.position.z + ahead.z * SPAWN_DISTANCE,
    )
    return position, -ahead


def _exec_move(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if not call.positional:
        return _skip(line, "MOVE needs an object reference")
    obj, err = _resolve(scene, alias, call.positional[0])
    if obj is None:
        return _skip(line, err)
    comps, err = _components(call, "MOVE", nullable=True, default=None)
    if err:
        return _skip(line, err)
    target = Vec3(
        comps["x"] if comps["x"] is not None else obj.position.x,
        comps["y"] if comps["y"] is not None else obj.position.y,
        comps["z"] if comps["z"] is not None else obj.position.z,
    )
    scene.set_position(obj, target)
    alias.retarget(obj.object_id)
    return _applied(scene, line)


def _exec_forward(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if not call.positional:
        return _skip(line, "FORWARD needs an object reference")
    obj, err = _resolve(scene, alias, call.positional[0])
    if obj is None:
        return _skip(line, err)
    comps, err = _components(call, "FORWARD", nullable=False, default=0.0)
    if err:
        return _skip(line, err)
    direction = Vec3(comps["x"], comps["y"], comps["z"])
    up_locked = scene.prefabs[obj.prefab_id].anchor != ANCHOR_BACK_CENTER
    effective = direction.horizontal() if up_locked else direction
    if effective.is_zero(1e-9):
        return _skip(line, "direction is zero after the up-lock projection"
                     if up_locked else "direction is zero")
    try:
        scene.set_orientation(obj, direction, up_locked=up_locked)
    except SceneError as exc:
        return _skip(line, str(exc))
    return _applied(scene, line)


def _exec_lookat(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if not call.positional:
        return _skip(line, "LOOKAT needs an object reference")
    obj, err = _resolve(scene, alias, call.positional[0])
    if obj is None:
        return _skip(line, err)
    comps, err = _components(call, "LOOKAT", nullable=True, default=None)
    if err:
        return _skip(line, err)
    target = Vec3(
        comps["x"] if comps["x"] is not None else obj.position.x,
        comps["y"] if comps["y"] is not None else obj.position.y,
        comps["z"] if comps["z"] is not None else obj.position.z,
    )
    up_locked = scene.prefabs[obj.prefab_id].anchor != ANCHOR_BACK_CENTER
    gaze = target - obj.position
    effective = gaze.horizontal() if up_locked else gaze
    if effective.is_zero(1e-9):
        return _skip(line, "no gaze direction: target matches the object position"
                     if gaze.is_zero(1e-9) else
                     "target is directly above or below an up-locked object")
    scene.set_orientation(obj, gaze, up_locked=up_locked)
    alias.retarget(obj.object_id)
    return _applied(scene, line)


def _exec_scale(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if not call.positional:
        return _skip(line, "SCALE needs an object reference")
    obj, err = _resolve(scene, alias, call.positional[0])
    if obj is None:
        return _skip(line, err)
    comps, err = _components(call, "SCALE", nullable=True, default=None)
    if err:
        return _skip(line, err)
    target = Vec3(
        comps["x"] if comps["x"] is not None else obj.scale.x,
        comps["y"] if comps["y"] is not None else obj.scale.y,
        comps["z"] if comps["z"] is not None else obj.scale.z,
    )
    if target.x <= 0 or target.y <= 0 or target.z <= 0:
        return _skip(line, "scale components must be positive")
    scene.set_scale(obj, target)
    alias.retarget(obj.object_id)
    return _applied(scene, line)


def _exec_delete(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if not ctx.allow_create_delete:
        return _skip(line, "DELETE is disabled in this task")
    if call.named or len(call.positional) != 1:
        return _skip(line, "DELETE takes a single object reference")
    obj, err = _resolve(scene, alias, call.positional[0])
    if obj is None:
        return _skip(line, err)
    scene.remove(obj.object_id)
    alias.forget(obj.object_id)
    return _applied(scene, line)


def _exec_message(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if call.named or len(call.positional) != 1 or not isinstance(call.positional[0], str):
        return _skip(line, "MESSAGE takes a single string")
    return Outcome(line=line, status=MESSAGE, content=call.positional[0])


def _exec_explain(call: ApiCall, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    line = call.raw_line
    if call.named or len(call.positional) != 1 or not isinstance(call.positional[0], str):
        return _skip(line, "EXPLAIN takes a single string")
    return Outcome(line=line, status=DEBUG, content=call.positional[0])


_HANDLERS: dict[str, Callable[[ApiCall, Scene, AliasState, ExecContext], Outcome]] = {
    "CREATE": _exec_create,
    "MOVE": _exec_move,
    "FORWARD": _exec_forward,
    "LOOKAT": _exec_lookat,
    "SCALE": _exec_scale,
    "DELETE": _exec_delete,
    "MESSAGE": _exec_message,
    "EXPLAIN": _exec_explain,
}


@dataclass
class ExecutionReport:
    outcomes: list[Outcome] = field(default_factory=list)
    error: Exception | None = None

    def successful_lines(self) -> list[str]:
        """Lines worth keeping in conversation history: everything that
        parsed and ran (edits, messages, debug), skips excluded."""
        return [o.line for o in self.outcomes
                if o.status in (APPLIED, MESSAGE, DEBUG)]

    def applied(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.status == APPLIED]


def run_line(text: str, scene: Scene, alias: AliasState, ctx: ExecContext) -> Outcome:
    if is_comment(text):
        return _skip(text, "comment")
    try:
        call = parse_line(text)
    except ParseError as exc:
        return _skip(text, f"parse error: {exc.reason}")
    assert call is not None
    return execute(call, scene, alias, ctx)


def execute_stream(
    lines: Iterable[str] | Iterator[str],
    scene: Scene,
    alias: AliasState,
    ctx: ExecContext,
    on_outcome: Callable[[Outcome], None] | None = None,
) -> ExecutionReport:
    """Consume a response line stream, executing each line on arrival.

    `on_outcome` fires synchronously per line, before the next line is
    pulled from the stream. A transport error from the stream ends
    processing; outcomes already produced are kept and the error is
    attached to the report.
    """
    report = ExecutionReport()
    iterator = iter(lines)
    while True:
        try:
            text = next(iterator)
        except StopIteration:
            break
        except Exception as exc:  # provider/transport failure mid-stream
            report.error = exc
            break
        outcome = run_line(text, scene, alias, ctx)
        report.outcomes.append(outcome)
        if on_outcome is not None:
            on_outcome(outcome)
    return report


def outcome_log(report: ExecutionReport) -> str:
    """One JSON object per line, in execution order."""
    return "".join(json.dumps(o.to_doc()) + "\n" for o in report.outcomes)
