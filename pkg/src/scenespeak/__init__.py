"""Speech- and gesture-driven 3D scene manipulation engine."""

from .geometry import OrientedBox, Vec3, avg_corner_distance, in_frustum
from .scene import (
    EnvironmentObject,
    Prefab,
    RoomInfo,
    Scene,
    SceneObject,
    TargetSpec,
    load_bundled_scene,
    load_scene,
)
from .session import (
    DivergenceError,
    Session,
    SessionConfig,
    TraceFormatError,
    TraceRecorder,
    check_target,
    replay_trace,
)

__version__ = "0.1.0"

__all__ = [
    "OrientedBox",
    "Vec3",
    "avg_corner_distance",
    "in_frustum",
    "EnvironmentObject",
    "Prefab",
    "RoomInfo",
    "Scene",
    "SceneObject",
    "TargetSpec",
    "load_bundled_scene",
    "load_scene",
    "DivergenceError",
    "Session",
    "SessionConfig",
    "TraceFormatError",
    "TraceRecorder",
    "check_target",
    "replay_trace",
    "__version__",
]
