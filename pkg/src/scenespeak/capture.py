"""Multimodal capture: timed speech, head pose, and gesture cues.

This is the front half of the pipeline. Raw events (words with start/end
times, head-pose samples, pointing hits, drawn lines) are fused into one
JSON payload per utterance: head poses collapse into focus-frame groups
with per-object attention weights, and gesture cues are spliced into the
transcript as text markers at the nearest inter-word boundary.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

from .geometry import Vec3, in_frustum, ray_box_intersect
from .scene import Scene, vec_doc


@dataclass(frozen=True)
class TimedWord:
    text: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class HeadSample:
    t_ms: int
    position: Vec3
    forward: Vec3
    right: Vec3


@dataclass(frozen=True)
class PointCue:
    """A confirmed pointing hit: where a hand ray met the scene."""

    hit_id: str
    t_ms: int
    target: str          # object_id or environment name
    position: Vec3
    normal: Vec3

    def to_doc(self) -> dict[str, Any]:
        return {
            "hit_id": self.hit_id,
            "object": self.target,
            "position": vec_doc(self.position),
            "normal": vec_doc(self.normal),
        }


@dataclass(frozen=True)
class LineEnd:
    target: str
    position: Vec3
    normal: Vec3

    def to_doc(self) -> dict[str, Any]:
        return {
            "object": self.target,
            "position": vec_doc(self.position),
            "normal": vec_doc(self.normal),
        }


@dataclass(frozen=True)
class LineCue:
    """A drawn line: a start hit, a free end point, and the start's surface
    projection. The end normal is the start-to-end direction (may be zero
    for a degenerate draw; kept as-is)."""

    line_id: str
    start_ms: int
    duration_ms: int
    start: LineEnd
    end: LineEnd
    project: LineEnd

    @property
    def end_ms(self) -> int:
        return self.start_ms + self.duration_ms

    def to_doc(self) -> dict[str, Any]:
        return {
            "Id": self.line_id,
            "Start": self.start.to_doc(),
            "End": self.end.to_doc(),
            "Project": self.project.to_doc(),
        }


@dataclass
class FocusGroup:
    samples: list[HeadSample]

    @property
    def start_ms(self) -> int:
        return self.samples[0].t_ms

    @property
    def end_ms(self) -> int:
        return self.samples[-1].t_ms

    @property
    def duration_s(self) -> float:
        return (self.end_ms - self.start_ms) / 1000.0

    def mean_forward(self) -> Vec3:
        acc = Vec3()
        for s in self.samples:
            acc = acc + s.forward
        return acc.normalized()


@dataclass(frozen=True)
class CaptureConfig:
    """Tunables for grouping and ranking; defaults match the runtime system."""

    angle_threshold_deg: float = 15.0
    min_duration_ms: int = 1000
    fov_h_deg: float = 90.0
    fov_v_deg: float = 90.0
    score_scale: int = 10
    silent_preroll_ms: int = 15000


def _angle_deg(a: Vec3, b: Vec3) -> float:
    cosv = max(-1.0, min(1.0, a.normalized().dot(b.normalized())))
    return math.degrees(math.acos(cosv))


def group_focus_frames(samples: list[HeadSample],
                       config: CaptureConfig = CaptureConfig()) -> list[FocusGroup]:
    """Greedy dwell segmentation of a head-pose stream.

    A sample joins the open group while its forward vector stays within the
    angular threshold of the group's running mean direction; otherwise the
    group closes and a new one opens. Groups shorter than the minimum dwell
    are dropped.
    """
    groups: list[FocusGroup] = []
    open_group: list[HeadSample] = []
    mean = Vec3()
    for sample in samples:
        if open_group and _angle_deg(mean * (1.0 / len(open_group)), sample.forward) <= config.angle_threshold_deg:
            open_group.append(sample)
            mean = mean + sample.forward.normalized()
        else:
            if open_group:
                groups.append(FocusGroup(open_group))
            open_group = [sample]
            mean = sample.forward.normalized()
    if open_group:
        groups.append(FocusGroup(open_group))
    return [g for g in groups if g.end_ms - g.start_ms >= config.min_duration_ms]


SceneProvider = Callable[[HeadSample], Scene]


def rank_group_objects(
    group: FocusGroup,
    scene: Scene | SceneProvider,
    config: CaptureConfig = CaptureConfig(),
) -> tuple[list[tuple[str, int]], list[tuple[str, int]]]:
    """Accumulate per-sample attention weights over one focus group.

    Each sample contributes round(K * (1 - d)) per visible box, where d is
    the angular distance from gaze center normalized by the half-FOV
    (clamped at zero). Returns (objects, environment) as (id, weight)
    lists sorted by weight descending, ties by first appearance.

    `scene` may be a single snapshot or a per-sample provider, for callers
    that rank against a scene that moved while the group was open.
    """
    provider: SceneProvider = scene if callable(scene) else (lambda _s: scene)
    obj_weights: dict[str, int] = {}
    env_weights: dict[str, int] = {}
    obj_seen: dict[str, int] = {}
    env_seen: dict[str, int] = {}
    order = 0
    for sample in group.samples:
        snapshot = provider(sample)
        for obj in snapshot.objects:
            visible, dist = in_frustum(obj.boundary, sample.position, sample.forward,
                                       config.fov_h_deg, config.fov_v_deg)
            if not visible:
                continue
            score = max(0, round(config.score_scale * (1.0 - dist)))
            obj_weights[obj.object_id] = obj_weights.get(obj.object_id, 0) + score
            if obj.object_id not in obj_seen:
                obj_seen[obj.object_id] = order
                order += 1
        for env in snapshot.environment:
            visible, dist = in_frustum(env.boundary, sample.position, sample.forward,
                                       config.fov_h_deg, config.fov_v_deg)
            if not visible:
                continue
            score = max(0, round(config.score_scale * (1.0 - dist)))
            env_weights[env.name] = env_weights.get(env.name, 0) + score
            if env.name not in env_seen:
                env_seen[env.name] = order
                order += 1

    def ranked(weights: dict[str, int], seen: dict[str, int]) -> list[tuple[str, int]]:
        kept = [(k, w) for k, w in weights.items() if w > 0]
        return sorted(kept, key=lambda kv: (-kv[1], seen[kv[0]]))

    return ranked(obj_weights, obj_seen), ranked(env_weights, env_seen)


def _boundary_times(words: list[TimedWord]) -> list[int]:
    """Insertion boundaries: before each word (at its start) plus one after
    the last word (at its end)."""
    return [w.start_ms for w in words] + [words[-1].end_ms] if words else [0]


def serialize_time(
    words: list[TimedWord],
    points: list[PointCue],
    lines: list[LineCue],
) -> tuple[str, str]:
    """Render the transcript and its marker-annotated twin.

    Every token (word or marker) is emitted with one trailing space.
    Markers: "[<h0>]" for a point, "[<d0>start]"/"[<d0>end]" for a line's
    endpoints, each placed at the inter-word boundary nearest its
    timestamp (ties to the earlier boundary); several markers at one
    boundary keep their time order.
    """
    boundaries = _boundary_times(words)
    markers: list[tuple[int, int, int, str]] = []  # (boundary, t, seq, text)
    seq = 0
    cue_times: list[tuple[int, str]] = [(p.t_ms, f"[<{p.hit_id}>]") for p in points]
    for line in lines:
        cue_times.append((line.start_ms, f"[<{line.line_id}>start]"))
        cue_times.append((line.end_ms, f"[<{line.line_id}>end]"))
    for t, text in cue_times:
        best = min(range(len(boundaries)), key=lambda i: (abs(boundaries[i] - t), i))
        markers.append((best, t, seq, text))
        seq += 1
    markers.sort()

    plain = "".join(w.text + " " for w in words)
    tokens: list[str] = []
    mi = 0
    for wi, word in enumerate(words):
        while mi < len(markers) and markers[mi][0] == wi:
            tokens.append(markers[mi][3])
            mi += 1
        tokens.append(word.text)
    while mi < len(markers):
        tokens.append(markers[mi][3])
        mi += 1
    annotated = "".join(t + " " for t in tokens)
    return plain, annotated


def segment_speech(words: list[TimedWord], groups: list[FocusGroup]) -> list[list[TimedWord]]:
    """Assign each word to the focus group containing its start time.

    Words outside every group go to the nearest group by interval
    distance, ties to the earlier group. Result is parallel to `groups`.
    """
    buckets: list[list[TimedWord]] = [[] for _ in groups]
    if not groups:
        return buckets
    for word in words:
        best, best_dist = 0, math.inf
        for i, g in enumerate(groups):
            if g.start_ms <= word.start_ms < g.end_ms:
                best, best_dist = i, 0.0
                break
            dist = min(abs(word.start_ms - g.start_ms), abs(word.start_ms - g.end_ms))
            if dist < best_dist:
                best, best_dist = i, dist
        buckets[best].append(word)
    return buckets


def load_interjections() -> frozenset[str]:
    text = resources.files("scenespeak").joinpath("prompts/interjections.txt").read_text()
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def should_send(transcript: str, lexicon: frozenset[str] | None = None) -> bool:
    """False when the transcript is empty or contains only interjections."""
    if lexicon is None:
        lexicon = load_interjections()
    tokens = [t for t in _alnum_tokens(transcript) if t not in lexicon]
    return bool(tokens)


def _alnum_tokens(text: str) -> list[str]:
    out, cur = [], []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


ENABLED_ALL = "All the actions are available"
ENABLED_NO_CREATE_DELETE = (
    "Creation and deletion are disabled, do not call CREATE(string prefab_id); "
    "or DELETE(string object_id);"
)
STEP_EXPLAIN_OFF = "Debugging disabled, do not call EXPLAIN(string message); !"
STEP_EXPLAIN_ON = (
    "Debugging enabled, call EXPLAIN(string reason); before each API call "
    "to explain your reasoning"
)


@dataclass
class UserPromptPayload:
    player_position: Vec3
    player_forward: Vec3
    player_right: Vec3
    objects: list[dict[str, Any]]
    head_stay_frames: list[dict[str, Any]]
    hit_points: list[dict[str, Any]]
    drawing_lines: list[dict[str, Any]]
    user_request: str
    user_request_with_actions: str
    enabled_actions: str
    step_explain: str

    def to_doc(self) -> dict[str, Any]:
        return {
            "player": {
                "position": vec_doc(self.player_position),
                "forward": vec_doc(self.player_forward),
                "right": vec_doc(self.player_right),
            },
            "objects": self.objects,
            "head_stay_frames": self.head_stay_frames,
            "hit_points": self.hit_points,
            "drawing_lines": self.drawing_lines,
            "user_request": self.user_request,
            "user_request_with_actions_inserted": self.user_request_with_actions,
            "enabled_actions": self.enabled_actions,
            "step_explain": self.step_explain,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), indent=2)


def build_user_prompt(
    scene: Scene,
    player: HeadSample,
    words: list[TimedWord],
    poses: list[HeadSample],
    points: list[PointCue],
    lines: list[LineCue],
    *,
    config: CaptureConfig = CaptureConfig(),
    allow_create_delete: bool = True,
    debug_explain: bool = False,
    display_text: str | None = None,
    scene_provider: SceneProvider | None = None,
) -> UserPromptPayload:
    """Fuse one utterance worth of capture into the request payload.

    `display_text`, when given, becomes `user_request` (the speech
    recognizer's display form); otherwise the joined word stream is used,
    which is also what the annotated string reduces to with markers
    stripped.
    """
    groups = group_focus_frames(poses, config)
    if words and groups:
        lo = words[0].start_ms - config.silent_preroll_ms
        hi = words[-1].end_ms
        groups = [g for g in groups if g.end_ms >= lo and g.start_ms <= hi]
    buckets = segment_speech(words, groups)
    frames: list[dict[str, Any]] = []
    for group, bucket in zip(groups, buckets):
        ranked_objs, ranked_env = rank_group_objects(
            group, scene_provider or scene, config)
        frames.append({
            "Stay Duration": group.duration_s,
            "Speak words": "".join(w.text + " " for w in bucket),
            "In Frustum Objects ID": [
                {"Object": oid, "Weight": w} for oid, w in ranked_objs],
            "In Frustum Environment Objects ID": [
                {"Object": name, "Weight": w} for name, w in ranked_env],
        })
    plain, annotated = serialize_time(words, points, lines)
    return UserPromptPayload(
        player_position=player.position,
        player_forward=player.forward,
        player_right=player.right,
        objects=scene.objects_doc(),
        head_stay_frames=frames,
        hit_points=[p.to_doc() for p in points],
        drawing_lines=[l.to_doc() for l in lines],
        user_request=display_text if display_text is not None else plain,
        user_request_with_actions=annotated,
        enabled_actions=ENABLED_ALL if allow_create_delete else ENABLED_NO_CREATE_DELETE,
        step_explain=STEP_EXPLAIN_ON if debug_explain else STEP_EXPLAIN_OFF,
    )


class NoHit(Exception):
    """A pick ray missed every box in the scene."""


def cast_ray(scene: Scene, origin: Vec3, direction: Vec3,
             flat_padding: float = 0.01) -> tuple[str, Vec3, Vec3]:
    """Nearest hit of a ray against all object and environment boxes.

    Returns (target, position, normal) where target is an object_id or an
    environment name. Flat boxes get `flat_padding` per half-extent so
    walls and the floor are pickable. Raises NoHit on a miss.
    """
    d = direction.normalized()
    best: tuple[float, str, Vec3] | None = None
    for obj in scene.objects:
        hit = ray_box_intersect(origin, d, obj.boundary)
        if hit and (best is None or hit[0] < best[0]):
            best = (hit[0], obj.object_id, hit[1])
    for env in scene.environment:
        size = env.boundary.size
        pad = flat_padding if min(size.x, size.y, size.z) < 1e-9 else 0.0
        hit = ray_box_intersect(origin, d, env.boundary, padding=pad)
        if hit and (best is None or hit[0] < best[0]):
            best = (hit[0], env.name, hit[1])
    if best is None:
        raise NoHit("ray hit nothing")
    t, target, normal = best
    return target, origin + d * t, normal


class CaptureAccumulator:
    """Collects one utterance worth of events; reset on finalize.

    Cue ids are assigned in arrival order within the utterance: h0, h1, ...
    for points and d0, d1, ... for lines.
    """

    def __init__(self, config: CaptureConfig = CaptureConfig()) -> None:
        self.config = config
        self.reset()

    def reset(self) -> None:
        self.words: list[TimedWord] = []
        self.poses: list[HeadSample] = []
        self.points: list[PointCue] = []
        self.lines: list[LineCue] = []

    def add_word(self, word: TimedWord) -> None:
        self.words.append(word)

    def add_pose(self, sample: HeadSample) -> None:
        self.poses.append(sample)

    def next_hit_id(self) -> str:
        return f"h{len(self.points)}"

    def next_line_id(self) -> str:
        return f"d{len(self.lines)}"

    def add_point(self, cue: PointCue) -> None:
        self.points.append(cue)

    def add_line(self, cue: LineCue) -> None:
        self.lines.append(cue)

    def record_point(self, scene: Scene, t_ms: int, origin: Vec3, direction: Vec3) -> PointCue:
        """Raycast helper for clients without their own picking."""
        target, position, normal = cast_ray(scene, origin, direction)
        cue = PointCue(self.next_hit_id(), t_ms, target, position, normal)
        self.points.append(cue)
        return cue

    def record_line(self, scene: Scene, start_ms: int, duration_ms: int,
                    origin: Vec3, direction: Vec3, end_position: Vec3) -> LineCue:
        target, position, normal = cast_ray(scene, origin, direction)
        direction_vec = end_position - position
        cue = LineCue(
            line_id=self.next_line_id(),
            start_ms=start_ms,
            duration_ms=duration_ms,
            start=LineEnd(target, position, normal),
            end=LineEnd("End point", end_position, direction_vec),
            project=LineEnd(target, position, normal),
        )
        self.lines.append(cue)
        return cue

    def transcript(self) -> str:
        return "".join(w.text + " " for w in self.words)
