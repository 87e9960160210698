"""Deterministic voice-command grammar: the LLM-free control path.

Commands have the shape <verb, subject, direction?, magnitude unit?>, e.g.
"move the chair left 20 centimeters", "rotate this here", "scale beanbag
chair height two". Words between keywords are ignored; keyword tables live
in prompts/voice_grammar.json.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any

from .geometry import Vec3
from .runtime import APPLIED, AliasState, ExecContext, Outcome, SKIPPED, spawn_pose
from .scene import ANCHOR_BACK_CENTER, Scene, SceneObject

MISSING_VERB = "missing_verb"
MISSING_SUBJECT = "missing_subject"
ILLEGAL_DIRECTION = "illegal_direction"
UNRESOLVABLE_SUBJECT = "unresolvable_subject"


class NoMatch(Exception):
    """The token stream is not a command; `reason` says what was missing."""

    def __init__(self, reason: str, detail: str = "") -> None:
        super().__init__(detail or reason)
        self.reason = reason


@lru_cache(maxsize=1)
def grammar() -> dict[str, Any]:
    text = resources.files("scenespeak").joinpath("prompts/voice_grammar.json").read_text()
    return json.loads(text)


def normalize(text: str) -> list[str]:
    """Lowercase, strip everything outside [a-z0-9 ], spell out small
    number words as digits. "Rotate Chair (No.)2 left!" -> [rotate, chair,
    no, 2, left]."""
    numbers = grammar()["numbers"]
    cleaned = [ch if ch.isalnum() else " " for ch in text.lower()]
    tokens = "".join(cleaned).split()
    return [str(numbers[t]) if t in numbers else t for t in tokens]


@dataclass(frozen=True)
class PrefabRef:
    prefab_id: str


@dataclass(frozen=True)
class ObjectRef:
    display_name: str


@dataclass(frozen=True)
class This:
    pass


@dataclass(frozen=True)
class PointAnchor:
    position: Vec3


@dataclass
class SelectionState:
    """What "this" and "here" refer to: grabbed/selected ids in selection
    order, and the most recent confirmed pointing hit."""

    selected: list[str] = field(default_factory=list)
    last_point: PointAnchor | None = None


@dataclass(frozen=True)
class VoiceCommand:
    verb: str
    subject: Any
    direction: str | None = None
    magnitude: float | None = None
    unit: str | None = None


def _name_tokens(name: str) -> list[str]:
    return normalize(name)


def _match_name(tokens: list[str], j: int, name_toks: list[str],
                fillers: frozenset[str]) -> int:
    """Try to match a tokenized name at position j, skipping ordinal
    fillers before a numeric name token. Returns tokens consumed, 0 if no
    match."""
    i, k = j, 0
    while k < len(name_toks):
        if i >= len(tokens):
            return 0
        if tokens[i] == name_toks[k]:
            i += 1
            k += 1
        elif k > 0 and tokens[i] in fillers and name_toks[k].isdigit():
            i += 1
        else:
            return 0
    return i - j


def _find_subject(tokens: list[str], start: int, verb: str,
                  scene: Scene) -> tuple[Any, int, int]:
    """Scan for the subject; returns (subject, position, consumed)."""
    fillers = frozenset(grammar()["ordinal_fillers"])
    display_names = [(o.display_name, _name_tokens(o.display_name)) for o in scene.objects]
    prefab_names = [(pid, _name_tokens(pid)) for pid in scene.prefabs]
    for j in range(start, len(tokens)):
        if verb != "create" and tokens[j] == "this":
            return This(), j, 1
        best_consumed = 0
        best_subject: Any = None
        if verb != "create":
            # display names first, so they win length ties against prefab ids
            for name, toks in display_names:
                consumed = _match_name(tokens, j, toks, fillers)
                if consumed > best_consumed:
                    best_consumed, best_subject = consumed, ObjectRef(name)
        for pid, toks in prefab_names:
            consumed = _match_name(tokens, j, toks, fillers)
            if consumed > best_consumed:
                best_consumed, best_subject = consumed, PrefabRef(pid)
        if best_subject is not None:
            return best_subject, j, best_consumed
    raise NoMatch(MISSING_SUBJECT, f"no subject after {verb!r}")


def parse_command(tokens: list[str], scene: Scene,
                  selection: SelectionState) -> VoiceCommand:
    """Scan a normalized token stream into a VoiceCommand.

    Raises NoMatch with one of: missing_verb, missing_subject,
    illegal_direction (also covers "here" with nothing pointed at),
    unresolvable_subject.
    """
    g = grammar()
    verbs = set(g["verbs"])
    verb = next((t for t in tokens if t in verbs), None)
    if verb is None:
        raise NoMatch(MISSING_VERB, "no verb in the utterance")
    iv = tokens.index(verb)
    subject, js, consumed = _find_subject(tokens, iv + 1, verb, scene)

    # resolvability is a parse-time error, not an apply-time one
    if isinstance(subject, This) and not selection.selected:
        raise NoMatch(UNRESOLVABLE_SUBJECT, "nothing is selected for 'this'")
    if isinstance(subject, PrefabRef) and verb != "create":
        if not scene.find_by_prefab(subject.prefab_id):
            raise NoMatch(UNRESOLVABLE_SUBJECT,
                          f"no {subject.prefab_id!r} in the scene")

    direction: str | None = None
    rest = tokens[js + consumed:]
    if verb in ("move", "rotate", "scale"):
        legal = g["directions"][verb]
        all_directions = set().union(*(set(d) for d in g["directions"].values()))
        for tok in rest:
            if tok in all_directions:
                if tok not in legal:
                    raise NoMatch(ILLEGAL_DIRECTION,
                                  f"{tok!r} does not apply to {verb!r}")
                direction = tok
                break
        if direction == "here" and selection.last_point is None:
            raise NoMatch(ILLEGAL_DIRECTION, "'here' needs a pointing hit first")

    magnitude: float | None = None
    unit: str | None = None
    unit_words = {w: u["name"] for u in g["units"].get(verb, []) for w in u["words"]}
    for i, tok in enumerate(rest):
        if tok == direction:
            continue
        if tok.isdigit():
            magnitude = float(tok)
            if i + 1 < len(rest) and rest[i + 1] in unit_words:
                unit = unit_words[rest[i + 1]]
            break
    return VoiceCommand(verb=verb, subject=subject, direction=direction,
                        magnitude=magnitude, unit=unit)


def _resolve_targets(cmd: VoiceCommand, scene: Scene,
                     selection: SelectionState) -> list[SceneObject]:
    if isinstance(cmd.subject, This):
        objs = [scene.get(oid) for oid in selection.selected]
        return [o for o in objs if o is not None]
    if isinstance(cmd.subject, ObjectRef):
        return scene.find_by_name(cmd.subject.display_name)
    return scene.find_by_prefab(cmd.subject.prefab_id)


def _move_meters(cmd: VoiceCommand) -> float:
    g = grammar()
    if cmd.magnitude is None:
        return g["defaults"]["move_cm"] / 100.0
    factor = {u["name"]: u["factor_m"] for u in g["units"]["move"]}
    return cmd.magnitude * factor.get(cmd.unit or "centimeters", 0.01)


def _rotate_degrees(cmd: VoiceCommand) -> float:
    if cmd.magnitude is None:
        return float(grammar()["defaults"]["rotate_deg"])
    return cmd.magnitude


def _yaw(obj: SceneObject, scene: Scene, degrees: float) -> None:
    """Rotate about the object's up axis; positive turns right."""
    theta = math.radians(degrees)
    f, up = obj.forward, obj.up
    new_f = (f * math.cos(theta) + up.cross(f) * math.sin(theta)).normalized()
    obj.forward = new_f
    obj.right = up.cross(new_f).normalized()
    scene.refresh_boundary(obj)


def _pitch(obj: SceneObject, scene: Scene, degrees: float) -> None:
    """Rotate about the object's right axis; positive tips forward upward."""
    theta = math.radians(degrees)
    f, up = obj.forward, obj.up
    new_f = (f * math.cos(theta) + up * math.sin(theta)).normalized()
    new_up = (up * math.cos(theta) - f * math.sin(theta)).normalized()
    obj.forward, obj.up = new_f, new_up
    scene.refresh_boundary(obj)


def _describe(cmd: VoiceCommand, target: SceneObject | str) -> str:
    name = target if isinstance(target, str) else target.display_name
    parts = ["voice", cmd.verb, name]
    if cmd.direction:
        parts.append(cmd.direction)
    if cmd.magnitude is not None:
        parts.append(f"{cmd.magnitude:g}")
        if cmd.unit:
            parts.append(cmd.unit)
    return " ".join(parts)


def apply_command(cmd: VoiceCommand, scene: Scene, selection: SelectionState,
                  ctx: ExecContext, alias: AliasState | None = None) -> list[Outcome]:
    """Apply a parsed command; one Outcome per affected object.

    Mirrors the API runtime's skip policy: impossible edits (pitching an
    up-locked object, zero scale) come back as skipped outcomes with a
    reason, never exceptions.
    """
    g = grammar()
    alias = alias or AliasState()

    if cmd.verb == "create":
        assert isinstance(cmd.subject, PrefabRef)
        if not ctx.allow_create_delete:
            return [Outcome(line=_describe(cmd, cmd.subject.prefab_id),
                            status=SKIPPED, reason="creation is disabled in this task")]
        position, facing = spawn_pose(scene, ctx.player)
        obj = scene.spawn(cmd.subject.prefab_id, position, facing)
        alias.retarget(obj.object_id)
        return [Outcome(line=_describe(cmd, obj), status=APPLIED,
                        revision=scene.bump_revision())]

    targets = _resolve_targets(cmd, scene, selection)
    if not targets:
        return [Outcome(line=_describe(cmd, "nothing"), status=SKIPPED,
                        reason="subject resolved to no objects")]
    outcomes: list[Outcome] = []
    for obj in targets:
        line = _describe(cmd, obj)
        if cmd.verb == "delete":
            if not ctx.allow_create_delete:
                outcomes.append(Outcome(line=line, status=SKIPPED,
                                        reason="deletion is disabled in this task"))
                continue
            scene.remove(obj.object_id)
            alias.forget(obj.object_id)
            outcomes.append(Outcome(line=line, status=APPLIED,
                                    revision=scene.bump_revision()))
        elif cmd.verb == "move":
            if cmd.direction == "here":
                assert selection.last_point is not None
                scene.set_position(obj, selection.last_point.position)
            else:
                spec = g["directions"]["move"].get(cmd.direction or "forward")
                axis = {"x": obj.right, "y": obj.up, "z": obj.forward}[spec["axis"]]
                delta = axis * (spec["sign"] * _move_meters(cmd))
                scene.set_position(obj, obj.position + delta)
            outcomes.append(Outcome(line=line, status=APPLIED,
                                    revision=scene.bump_revision()))
        elif cmd.verb == "rotate":
            up_locked = scene.prefabs[obj.prefab_id].anchor != ANCHOR_BACK_CENTER
            if cmd.direction == "here":
                assert selection.last_point is not None
                gaze = selection.last_point.position - obj.position
                effective = gaze.horizontal() if up_locked else gaze
                if effective.is_zero(1e-9):
                    outcomes.append(Outcome(line=line, status=SKIPPED,
                                            reason="pointing at the object itself"))
                    continue
                scene.set_orientation(obj, gaze, up_locked=up_locked)
            else:
                spec = g["directions"]["rotate"].get(cmd.direction or "right")
                degrees = _rotate_degrees(cmd) * spec["sign"]
                if spec["axis"] == "y":
                    _yaw(obj, scene, degrees)
                else:
                    if up_locked:
                        outcomes.append(Outcome(
                            line=line, status=SKIPPED,
                            reason="up-locked objects cannot pitch"))
                        continue
                    _pitch(obj, scene, degrees)
            outcomes.append(Outcome(line=line, status=APPLIED,
                                    revision=scene.bump_revision()))
        elif cmd.verb == "scale":
            factor = cmd.magnitude if cmd.magnitude is not None \
                else g["defaults"]["scale_factor"]
            if factor <= 0:
                outcomes.append(Outcome(line=line, status=SKIPPED,
                                        reason="scale must be positive"))
                continue
            s = obj.scale
            if cmd.direction is None:
                new_scale = Vec3(factor, factor, factor)
            else:
                axis = g["directions"]["scale"][cmd.direction]["axis"]
                new_scale = Vec3(
                    factor if axis == "x" else s.x,
                    factor if axis == "y" else s.y,
                    factor if axis == "z" else s.z,
                )
            scene.set_scale(obj, new_scale)
            outcomes.append(Outcome(line=line, status=APPLIED,
                                    revision=scene.bump_revision()))
        else:
            outcomes.append(Outcome(line=line, status=SKIPPED,
                                    reason=f"unsupported verb {cmd.verb!r}"))
    return outcomes
