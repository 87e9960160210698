"""Scene state: prefab catalog, manipulatable objects, environment, room.

Serialization matches the wire/prompt format exactly: every vector
component renders as a two-decimal string (half-away-from-zero), boundary
keys are capitalized, and the three scene documents keep their field
order. Scene files on disk reuse the same shapes under one root object.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .geometry import WORLD_UP, OrientedBox, Vec3, orthonormal_basis


class SceneError(Exception):
    """Malformed scene file or an operation against a missing entity."""


def fmt2(value: float) -> str:
    """Two-decimal string, ties rounded away from zero; never "-0.00"."""
    q = Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    s = f"{q:.2f}"
    return "0.00" if s == "-0.00" else s


def vec_doc(v: Vec3) -> dict[str, str]:
    return {"x": fmt2(v.x), "y": fmt2(v.y), "z": fmt2(v.z)}


def boundary_doc(b: OrientedBox) -> dict[str, dict[str, str]]:
    return {
        "Central": vec_doc(b.central),
        "Size": vec_doc(b.size),
        "Forward": vec_doc(b.forward),
        "Up": vec_doc(b.up),
        "Right": vec_doc(b.right),
    }


def _parse_vec(doc: dict[str, Any], where: str) -> Vec3:
    try:
        return Vec3(float(doc["x"]), float(doc["y"]), float(doc["z"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"bad vector in {where}: {doc!r}") from exc


def _parse_boundary(doc: dict[str, Any], where: str) -> OrientedBox:
    """Parse a boundary, re-orthonormalizing the triad.

    Stored axes are quantized to two decimals, so they arrive slightly
    off-unit; Gram-Schmidt against the stored up restores an exact triad
    without moving any component far enough to change its rendering.
    """
    try:
        central = _parse_vec(doc["Central"], where)
        size = _parse_vec(doc["Size"], where)
        forward = _parse_vec(doc["Forward"], where)
        up = _parse_vec(doc["Up"], where)
    except KeyError as exc:
        raise SceneError(f"boundary in {where} is missing {exc}") from exc
    try:
        f = forward.normalized()
    except ValueError as exc:
        raise SceneError(f"boundary in {where} has a zero forward axis") from exc
    up_ortho = up - f * up.dot(f)
    if up_ortho.is_zero(1e-9):
        _, u, r = orthonormal_basis(f)
    else:
        u = up_ortho.normalized()
        r = u.cross(f)
    return OrientedBox(central=central, size=size, forward=f, up=u, right=r)


# Anchor conventions. Furniture sits on the floor: the stated position is
# the bottom-center of the box. Wall decor is placed by its back face.
ANCHOR_BOTTOM_CENTER = "bottom_center"
ANCHOR_BACK_CENTER = "back_center"


@dataclass(frozen=True)
class Prefab:
    prefab_id: str
    description: str
    remarks: str
    dimensions: Vec3

    @property
    def anchor(self) -> str:
        if "back surface" in self.remarks.lower():
            return ANCHOR_BACK_CENTER
        return ANCHOR_BOTTOM_CENTER

    def to_doc(self) -> dict[str, Any]:
        return {
            "prefab_id": self.prefab_id,
            "description": self.description,
            "remarks": self.remarks,
            "dimensions": vec_doc(self.dimensions),
        }


@dataclass
class SceneObject:
    object_id: str
    prefab_id: str
    display_name: str
    position: Vec3
    scale: Vec3
    forward: Vec3
    up: Vec3
    right: Vec3
    boundary: OrientedBox

    def to_doc(self) -> dict[str, Any]:
        return {
            "object_id": self.object_id,
            "object_name": self.display_name,
            "position": vec_doc(self.position),
            "scale": vec_doc(self.scale),
            "boundary": boundary_doc(self.boundary),
        }


@dataclass(frozen=True)
class EnvironmentObject:
    name: str
    boundary: OrientedBox

    def to_doc(self) -> dict[str, Any]:
        return {"name": self.name, "boundary": boundary_doc(self.boundary)}


@dataclass(frozen=True)
class RoomInfo:
    center: Vec3
    dimensions: Vec3

    @property
    def floor_y(self) -> float:
        return self.center.y

    def render_text(self) -> str:
        """The two-line room block used in the system prompt (newline-terminated)."""
        c, d = self.center, self.dimensions
        return (
            f"Room Center: ({fmt2(c.x)}, {fmt2(c.y)}, {fmt2(c.z)})\n"
            f"Room Dimensions: ({fmt2(d.x)}, {fmt2(d.y)}, {fmt2(d.z)})\n"
        )


@dataclass(frozen=True)
class TargetSpec:
    """A goal pose for one object, matched by prefab and creation order."""

    prefab_id: str
    index: int
    goal: OrientedBox
    notes: str = ""


def rebuild_boundary(prefab: Prefab, position: Vec3, scale: Vec3,
                     forward: Vec3, up: Vec3, right: Vec3) -> OrientedBox:
    """Derive the world-space box from anchor position, scale and orientation."""
    size = prefab.dimensions.scaled_by(scale)
    if prefab.anchor == ANCHOR_BACK_CENTER:
        central = position + forward * (size.z / 2.0)
    else:
        central = position + up * (size.y / 2.0)
    return OrientedBox(central=central, size=size, forward=forward, up=up, right=right)


class Scene:
    """Mutable scene state with a monotonically increasing revision counter."""

    def __init__(self, room: RoomInfo, prefabs: Iterable[Prefab],
                 environment: Iterable[EnvironmentObject] = (),
                 targets: Iterable[TargetSpec] = ()) -> None:
        self.room = room
        self.prefabs: dict[str, Prefab] = {p.prefab_id: p for p in prefabs}
        self.environment: list[EnvironmentObject] = list(environment)
        self.objects: list[SceneObject] = []
        self.targets: list[TargetSpec] = list(targets)
        self.revision = 0
        self._id_counter = 0
        self._name_counters: dict[str, int] = {}

    # -- lookups ---------------------------------------------------------

    def get(self, object_id: str) -> SceneObject | None:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        return None

    def find_by_name(self, display_name: str) -> list[SceneObject]:
        wanted = display_name.strip().lower()
        return [o for o in self.objects if o.display_name.lower() == wanted]

    def find_by_prefab(self, prefab_id: str) -> list[SceneObject]:
        wanted = prefab_id.strip().lower()
        return [o for o in self.objects if o.prefab_id.lower() == wanted]

    def environment_by_name(self, name: str) -> EnvironmentObject | None:
        for env in self.environment:
            if env.name == name:
                return env
        return None

    # -- mutation --------------------------------------------------------

    def _next_object_id(self) -> str:
        taken = {o.object_id for o in self.objects}
        while True:
            self._id_counter += 1
            candidate = str(self._id_counter)
            if candidate not in taken:
                return candidate

    def _next_display_name(self, prefab_id: str) -> str:
        n = self._name_counters.get(prefab_id, 0) + 1
        self._name_counters[prefab_id] = n
        return f"{prefab_id} {n}"

    def spawn(self, prefab_id: str, position: Vec3, forward: Vec3) -> SceneObject:
        """Instantiate a prefab at scale 1 with an up-locked orientation."""
        prefab = self.prefabs.get(prefab_id)
        if prefab is None:
            raise SceneError(f"unknown prefab {prefab_id!r}")
        f, up, right = orthonormal_basis(forward)
        scale = Vec3(1.0, 1.0, 1.0)
        obj = SceneObject(
            object_id=self._next_object_id(),
            prefab_id=prefab_id,
            display_name=self._next_display_name(prefab_id),
            position=position,
            scale=scale,
            forward=f,
            up=up,
            right=right,
            boundary=rebuild_boundary(prefab, position, scale, f, up, right),
        )
        self.objects.append(obj)
        return obj

    def remove(self, object_id: str) -> SceneObject:
        obj = self.get(object_id)
        if obj is None:
            raise SceneError(f"no object with id {object_id!r}")
        self.objects.remove(obj)
        return obj

    def refresh_boundary(self, obj: SceneObject) -> None:
        prefab = self.prefabs[obj.prefab_id]
        obj.boundary = rebuild_boundary(
            prefab, obj.position, obj.scale, obj.forward, obj.up, obj.right)

    def set_position(self, obj: SceneObject, position: Vec3) -> None:
        obj.position = position
        self.refresh_boundary(obj)

    def set_orientation(self, obj: SceneObject, forward: Vec3, up_locked: bool = True) -> None:
        """Point an object along `forward`.

        Up-locked objects (all furniture) keep up = world up and only take
        the horizontal part of `forward`; a zero horizontal projection is a
        caller error. Free objects (wall decor) take the full vector.
        """
        if up_locked:
            flat = forward.horizontal()
            if flat.is_zero(1e-9):
                raise SceneError("horizontal projection of forward is zero")
            f = flat.normalized()
            up = WORLD_UP
            right = up.cross(f).normalized()
        else:
            f, up, right = orthonormal_basis(forward)
        obj.forward, obj.up, obj.right = f, up, right
        self.refresh_boundary(obj)

    def set_scale(self, obj: SceneObject, scale: Vec3) -> None:
        if scale.x <= 0 or scale.y <= 0 or scale.z <= 0:
            raise SceneError("scale components must be positive")
        obj.scale = scale
        self.refresh_boundary(obj)

    def bump_revision(self) -> int:
        self.revision += 1
        return self.revision

    def clone(self) -> "Scene":
        return copy.deepcopy(self)

    # -- serialization ---------------------------------------------------

    def objects_doc(self) -> list[dict[str, Any]]:
        return [o.to_doc() for o in self.objects]

    def environment_doc(self) -> list[dict[str, Any]]:
        return [e.to_doc() for e in self.environment]

    def prefabs_doc(self) -> dict[str, Any]:
        return {"prefabs": [p.to_doc() for p in self.prefabs.values()]}

    def objects_json(self) -> str:
        return json.dumps(self.objects_doc(), indent=2)

    def environment_json(self) -> str:
        """Environment block as rendered into the system prompt (4-space indent)."""
        return json.dumps(self.environment_doc(), indent=4)

    def prefabs_json(self) -> str:
        return json.dumps(self.prefabs_doc(), indent=2)

    def to_file_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "room": {
                "center": vec_doc(self.room.center),
                "dimensions": vec_doc(self.room.dimensions),
            },
            "prefabs": [p.to_doc() for p in self.prefabs.values()],
            "environment": self.environment_doc(),
            "objects": self.objects_doc(),
        }
        if self.targets:
            doc["targets"] = [
                {
                    "prefab_id": t.prefab_id,
                    "index": t.index,
                    "goal": boundary_doc(t.goal),
                    **({"notes": t.notes} if t.notes else {}),
                }
                for t in self.targets
            ]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_file_doc(), indent=2) + "\n"


def object_from_doc(doc: dict[str, Any], prefab_for: dict[str, Prefab]) -> SceneObject:
    name = doc.get("object_name", "")
    prefab_id = doc.get("prefab_id") or _prefab_id_from_name(name, prefab_for)
    boundary = _parse_boundary(doc["boundary"], f"object {doc.get('object_id')}")
    return SceneObject(
        object_id=str(doc["object_id"]),
        prefab_id=prefab_id,
        display_name=name,
        position=_parse_vec(doc["position"], "object position"),
        scale=_parse_vec(doc["scale"], "object scale"),
        forward=boundary.forward,
        up=boundary.up,
        right=boundary.right,
        boundary=boundary,
    )


def _prefab_id_from_name(name: str, prefab_for: dict[str, Prefab]) -> str:
    """Objects in scene files name their prefab implicitly: "Chair 2" -> Chair."""
    candidate = name.strip()
    while candidate:
        for pid in prefab_for:
            if pid.lower() == candidate.lower():
                return pid
        if " " not in candidate:
            break
        candidate = candidate.rsplit(" ", 1)[0]
    raise SceneError(f"cannot infer prefab for object named {name!r}")


def scene_from_doc(doc: dict[str, Any]) -> Scene:
    try:
        room = RoomInfo(
            center=_parse_vec(doc["room"]["center"], "room center"),
            dimensions=_parse_vec(doc["room"]["dimensions"], "room dimensions"),
        )
        prefabs = [
            Prefab(
                prefab_id=p["prefab_id"],
                description=p["description"],
                remarks=p["remarks"],
                dimensions=_parse_vec(p["dimensions"], f"prefab {p.get('prefab_id')}"),
            )
            for p in doc["prefabs"]
        ]
    except (KeyError, TypeError) as exc:
        raise SceneError(f"scene file is missing {exc}") from exc
    environment = [
        EnvironmentObject(name=e["name"], boundary=_parse_boundary(e["boundary"], e["name"]))
        for e in doc.get("environment", [])
    ]
    prefab_map = {p.prefab_id: p for p in prefabs}
    targets = [
        TargetSpec(
            prefab_id=t["prefab_id"],
            index=int(t["index"]),
            goal=_parse_boundary(t["goal"], "target goal"),
            notes=t.get("notes", ""),
        )
        for t in doc.get("targets", [])
    ]
    scene = Scene(room=room, prefabs=prefabs, environment=environment, targets=targets)
    for odoc in doc.get("objects", []):
        scene.objects.append(object_from_doc(odoc, prefab_map))
    # seed the display-name counters past any preloaded "Prefab N" names
    for obj in scene.objects:
        parts = obj.display_name.rsplit(" ", 1)
        if len(parts) == 2 and parts[1].isdigit() and parts[0] in scene.prefabs:
            n = int(parts[1])
            if n > scene._name_counters.get(parts[0], 0):
                scene._name_counters[parts[0]] = n
    for target in targets:
        if target.prefab_id not in scene.prefabs:
            raise SceneError(f"target references unknown prefab {target.prefab_id!r}")
    return scene


def load_scene(path: str | Path) -> Scene:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene file {path} is not valid JSON: {exc}") from exc
    return scene_from_doc(doc)


def load_bundled_scene(name: str) -> Scene:
    """Load a scene shipped with the package, e.g. "sandbox"."""
    ref = resources.files("scenespeak").joinpath(f"data/scenes/{name}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise SceneError(f"no bundled scene named {name!r}") from exc
    return scene_from_doc(json.loads(text))
