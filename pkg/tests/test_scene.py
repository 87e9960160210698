"""Scene state, anchors, and the two-decimal serialization contract."""

import json

import pytest

from conftest import golden_json
from scenespeak.geometry import Vec3
from scenespeak.scene import (
    SceneError,
    boundary_doc,
    fmt2,
    load_bundled_scene,
    rebuild_boundary,
    scene_from_doc,
    vec_doc,
)


@pytest.mark.parametrize(
    "value,expected",
    [
        (0.0, "0.00"),
        (-0.0, "0.00"),
        (-0.004, "0.00"),
        (0.005, "0.01"),
        (2.675, "2.68"),
        (-1.555, "-1.56"),
        (5.0, "5.00"),
        (9.999, "10.00"),
        (0.0049, "0.00"),
        (-0.005, "-0.01"),
    ],
)
def test_fmt2(value, expected):
    assert fmt2(value) == expected


def test_vec_doc_keys_and_rounding():
    assert vec_doc(Vec3(1.234, -0.001, 2)) == {"x": "1.23", "y": "0.00", "z": "2.00"}


def test_boundary_doc_key_order(sandbox):
    doc = boundary_doc(sandbox.objects[0].boundary)
    assert list(doc) == ["Central", "Size", "Forward", "Up", "Right"]


class TestAnchors:
    def test_chair_bottom_center(self, sandbox):
        chair = sandbox.prefabs["Chair"]
        b = rebuild_boundary(chair, Vec3(5.0, 0.05, 5.75), Vec3(1, 1, 1),
                             Vec3(0, 0, 1), Vec3(0, 1, 0), Vec3(1, 0, 0))
        assert abs(b.central.x - 5.0) < 1e-9
        assert abs(b.central.y - 0.555) < 1e-9
        assert abs(b.central.z - 5.75) < 1e-9
        assert (b.size - Vec3(0.55, 1.01, 0.56)).norm() < 1e-9

    def test_picture_back_surface(self, sandbox):
        pic = sandbox.prefabs["Picture"]
        b = rebuild_boundary(pic, Vec3(9.94, 1.52, 7.01), Vec3(1, 1, 1),
                             Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, -1))
        assert abs(b.central.x - 9.905) < 1e-9
        assert abs(b.central.y - 1.52) < 1e-9
        assert abs(b.central.z - 7.01) < 1e-9

    def test_scale_multiplies_dimensions(self, sandbox):
        chair = sandbox.prefabs["Chair"]
        b = rebuild_boundary(chair, Vec3(0, 0, 0), Vec3(2, 3, 4),
                             Vec3(0, 0, 1), Vec3(0, 1, 0), Vec3(1, 0, 0))
        assert (b.size - Vec3(1.10, 3.03, 2.24)).norm() < 1e-9
        assert abs(b.central.y - 3.03 / 2) < 1e-9


class TestSpawn:
    def test_names_and_ids(self, sandbox):
        a = sandbox.spawn("Chair", Vec3(1, 0.05, 1), Vec3(0, 0, 1))
        b = sandbox.spawn("Chair", Vec3(2, 0.05, 1), Vec3(0, 0, 1))
        c = sandbox.spawn("Table", Vec3(3, 0.05, 1), Vec3(0, 0, 1))
        assert (a.display_name, b.display_name, c.display_name) == (
            "Chair 1", "Chair 2", "Table 1")
        ids = {o.object_id for o in sandbox.objects}
        assert len(ids) == len(sandbox.objects)

    def test_unknown_prefab(self, sandbox):
        with pytest.raises(SceneError, match="unknown prefab"):
            sandbox.spawn("Rocket", Vec3(), Vec3(0, 0, 1))

    def test_spawned_boundary_is_valid(self, sandbox):
        obj = sandbox.spawn("Sofa", Vec3(2, 0.05, 2), Vec3(1, 0, 1))
        obj.boundary.validate()


class TestOrientation:
    def test_up_locked_projects_horizontal(self, sandbox):
        obj = sandbox.spawn("Chair", Vec3(1, 0.05, 1), Vec3(0, 0, 1))
        sandbox.set_orientation(obj, Vec3(1, 1, 0), up_locked=True)
        assert (obj.forward - Vec3(1, 0, 0)).norm() < 1e-9
        assert (obj.up - Vec3(0, 1, 0)).norm() < 1e-9
        obj.boundary.validate()

    def test_up_locked_rejects_vertical(self, sandbox):
        obj = sandbox.spawn("Chair", Vec3(1, 0.05, 1), Vec3(0, 0, 1))
        with pytest.raises(SceneError, match="horizontal"):
            sandbox.set_orientation(obj, Vec3(0, 1, 0), up_locked=True)

    def test_free_orientation_tilts(self, sandbox):
        obj = sandbox.spawn("Picture", Vec3(1, 1.5, 1), Vec3(0, 0, 1))
        sandbox.set_orientation(obj, Vec3(0, 1, 0), up_locked=False)
        assert (obj.forward - Vec3(0, 1, 0)).norm() < 1e-9
        obj.boundary.validate()


class TestMutation:
    def test_set_position_refreshes_boundary(self, sandbox):
        obj = sandbox.get("-23780")
        before = obj.boundary.central
        sandbox.set_position(obj, obj.position + Vec3(1, 0, 0))
        assert abs(obj.boundary.central.x - (before.x + 1)) < 1e-9

    def test_set_scale_rejects_non_positive(self, sandbox):
        obj = sandbox.get("-23780")
        with pytest.raises(SceneError, match="positive"):
            sandbox.set_scale(obj, Vec3(1, 0, 1))

    def test_remove(self, sandbox):
        sandbox.remove("-23780")
        assert sandbox.get("-23780") is None
        with pytest.raises(SceneError):
            sandbox.remove("-23780")

    def test_revision_counter(self, sandbox):
        r0 = sandbox.revision
        assert sandbox.bump_revision() == r0 + 1
        assert sandbox.bump_revision() == r0 + 2


class TestSerialization:
    def test_save_load_fixpoint(self, sandbox):
        sandbox.spawn("Chair", Vec3(1.23, 0.05, 4.56), Vec3(1, 0, 2))
        text = sandbox.to_json()
        again = scene_from_doc(json.loads(text))
        assert again.to_json() == text

    def test_loaded_boundaries_validate(self, sandbox):
        for obj in sandbox.objects:
            obj.boundary.validate()
        for env in sandbox.environment:
            env.boundary.validate()

    def test_cactus_doc_matches_golden_prompt_entry(self, sandbox):
        golden = golden_json("golden_user_prompt.json")["objects"][0]
        assert sandbox.objects_doc()[0] == golden

    def test_name_counter_survives_reload(self, sandbox):
        sandbox.spawn("Chair", Vec3(1, 0.05, 1), Vec3(0, 0, 1))
        sandbox.spawn("Chair", Vec3(2, 0.05, 1), Vec3(0, 0, 1))
        again = scene_from_doc(json.loads(sandbox.to_json()))
        obj = again.spawn("Chair", Vec3(3, 0.05, 1), Vec3(0, 0, 1))
        assert obj.display_name == "Chair 3"

    def test_prefab_inference_rejects_stranger(self, sandbox):
        doc = json.loads(sandbox.to_json())
        doc["objects"][0]["object_name"] = "Submarine 1"
        with pytest.raises(SceneError, match="infer prefab"):
            scene_from_doc(doc)


class TestBundledScenes:
    def test_task_scenes_load(self):
        a = load_bundled_scene("task1a")
        assert len(a.objects) == 1 and len(a.targets) == 1
        b = load_bundled_scene("task1b")
        assert len(b.objects) == 3 and len(b.targets) == 3
        for scene in (a, b):
            for t in scene.targets:
                t.goal.validate()

    def test_unknown_bundle(self):
        with pytest.raises(SceneError, match="no bundled scene"):
            load_bundled_scene("nowhere")

    def test_room_text_is_two_lines(self, sandbox):
        text = sandbox.room.render_text()
        assert text.endswith("\n")
        assert len(text.rstrip("\n").split("\n")) == 2
