"""Vector and oriented-box primitives.

Everything downstream (scene state, frustum ranking, target metrics, ray
picking) is built on the two types here. Plain dataclasses, no numpy: the
vectors are three floats and the math is written out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, k: float) -> Vec3:
        return Vec3(self.x * k, self.y * k, self.z * k)

    __rmul__ = __mul__

    def __neg__(self) -> Vec3:
        return Vec3(-self.x, -self.y, -self.z)

    def dot(self, other: Vec3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: Vec3) -> Vec3:
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> Vec3:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def distance(self, other: Vec3) -> float:
        return (self - other).norm()

    def scaled_by(self, other: Vec3) -> Vec3:
        """Component-wise product."""
        return Vec3(self.x * other.x, self.y * other.y, self.z * other.z)

    def horizontal(self) -> Vec3:
        """Projection onto the ground plane (y zeroed), not normalized."""
        return Vec3(self.x, 0.0, self.z)

    def is_zero(self, eps: float = 1e-12) -> bool:
        return self.norm() < eps


WORLD_UP = Vec3(0.0, 1.0, 0.0)

# Canonical corner sign order: (right, up, forward) signs walk
# ---, --+, -+-, -++, +--, +-+, ++-, +++.
_CORNER_SIGNS = [
    (sr, su, sf)
    for sr in (-1.0, 1.0)
    for su in (-1.0, 1.0)
    for sf in (-1.0, 1.0)
]


@dataclass(frozen=True)
class OrientedBox:
    """Oriented bounding box: center plus extents along a right-handed triad."""

    central: Vec3
    size: Vec3
    forward: Vec3
    up: Vec3
    right: Vec3

    def validate(self, eps: float = 1e-6) -> None:
        """Raise ValueError unless the triad is orthonormal and right-handed."""
        for name, axis in (("forward", self.forward), ("up", self.up), ("right", self.right)):
            if abs(axis.norm() - 1.0) > eps:
                raise ValueError(f"{name} axis is not unit length")
        if abs(self.forward.dot(self.up)) > eps or abs(self.forward.dot(self.right)) > eps:
            raise ValueError("box axes are not orthogonal")
        if (self.up.cross(self.forward) - self.right).norm() > eps:
            raise ValueError("box triad is not right-handed (right != up x forward)")
        if self.size.x < 0 or self.size.y < 0 or self.size.z < 0:
            raise ValueError("box size components must be non-negative")

    def corners(self) -> list[Vec3]:
        """The 8 corners in the canonical sign order over right/up/forward."""
        hr = self.right * (self.size.x / 2.0)
        hu = self.up * (self.size.y / 2.0)
        hf = self.forward * (self.size.z / 2.0)
        return [
            self.central + hr * sr + hu * su + hf * sf
            for sr, su, sf in _CORNER_SIGNS
        ]


def avg_corner_distance(a: OrientedBox, b: OrientedBox) -> float:
    """Mean distance between same-index corners of two boxes.

    This is the pose metric used for target checks: identical boxes give 0,
    a pure translation gives exactly the translation length.
    """
    ca, cb = a.corners(), b.corners()
    return sum(pa.distance(pb) for pa, pb in zip(ca, cb)) / 8.0


def orthonormal_basis(forward: Vec3, up_hint: Vec3 = WORLD_UP) -> tuple[Vec3, Vec3, Vec3]:
    """Build a right-handed (forward, up, right) triad from a forward vector.

    Up is the hint re-orthogonalized against forward; when forward is
    (anti)parallel to the hint, +x seeds the right axis instead.
    """
    f = forward.normalized()
    right = up_hint.cross(f)
    if right.is_zero(1e-9):
        right = f.cross(Vec3(0.0, 0.0, 1.0).cross(f))
        if right.is_zero(1e-9):
            right = Vec3(1.0, 0.0, 0.0)
    right = right.normalized()
    up = f.cross(right).normalized()
    return f, up, right


def in_frustum(
    box: OrientedBox,
    head_position: Vec3,
    head_forward: Vec3,
    fov_h_deg: float = 90.0,
    fov_v_deg: float = 90.0,
) -> tuple[bool, float]:
    """Center-point frustum test against a symmetric view pyramid.

    Returns (visible, screen_center_distance) where the distance is the
    angle between the gaze and the box center, normalized by the horizontal
    half-angle: 0 at dead center, 1 at the frustum edge. The distance is
    reported even when the center is outside the frustum.
    """
    forward, up, right = orthonormal_basis(head_forward)
    d = box.central - head_position
    if d.is_zero():
        return True, 0.0
    dn = d.normalized()
    cos_angle = max(-1.0, min(1.0, dn.dot(forward)))
    angle_deg = math.degrees(math.acos(cos_angle))
    center_distance = angle_deg / (fov_h_deg / 2.0)

    z = d.dot(forward)
    if z <= 0.0:
        return False, center_distance
    azimuth = math.degrees(math.atan2(abs(d.dot(right)), z))
    elevation = math.degrees(math.atan2(abs(d.dot(up)), z))
    visible = azimuth <= fov_h_deg / 2.0 and elevation <= fov_v_deg / 2.0
    return visible, center_distance


def ray_box_intersect(
    origin: Vec3,
    direction: Vec3,
    box: OrientedBox,
    padding: float = 0.0,
) -> tuple[float, Vec3] | None:
    """Slab-test a ray against an oriented box.

    Returns (t, surface_normal) for the nearest hit with t >= 0, or None.
    `padding` inflates each half-extent; flat boxes (walls, floor) need it
    to be pickable at all.
    """
    axes = (box.right, box.up, box.forward)
    half = (
        box.size.x / 2.0 + padding,
        box.size.y / 2.0 + padding,
        box.size.z / 2.0 + padding,
    )
    rel = origin - box.central
    t_near, t_far = -math.inf, math.inf
    near_axis, near_sign = 0, 1.0
    for i, axis in enumerate(axes):
        o = rel.dot(axis)
        d = direction.dot(axis)
        if abs(d) < 1e-12:
            if abs(o) > half[i]:
                return None
            continue
        t1 = (-half[i] - o) / d
        t2 = (half[i] - o) / d
        sign = -1.0
        if t1 > t2:
            t1, t2 = t2, t1
            sign = 1.0
        if t1 > t_near:
            t_near, near_axis, near_sign = t1, i, sign
        t_far = min(t_far, t2)
        if t_near > t_far:
            return None
    t = t_near if t_near >= 0.0 else t_far
    if t < 0.0 or t == math.inf:
        return None
    if t_near < 0.0:
        # origin inside the box: normal points back along the ray's axis exit
        near_sign = -near_sign
    normal = axes[near_axis] * near_sign
    return t, normal
