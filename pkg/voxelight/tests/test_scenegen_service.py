"""Tests for primitive rasterization and the demo scenes."""
import hashlib
from pathlib import Path
from typing import Dict

import pytest

from voxelight.errors import UnknownScene
from voxelight.models import AIR, VoxelGrid, material_preset
from voxelight.services.cloud_service import CloudService
from voxelight.services.scene_service import SceneService
from voxelight.services.scenegen_service import (
    GALLERY_ORDER,
    Box,
    CheckerFloor,
    FogRegion,
    ScenegenService,
    Slab,
    Sphere,
    build_grid,
    rasterize,
    resolve_material,
)
from voxelight.shading import render

GOLDEN_CLOUDS = Path(__file__).parent / "fixtures" / "demo_clouds.sha256"


def _golden_hashes() -> Dict[str, str]:
    """sha256sum-style lines: digest, two spaces, file name."""
    entries = {}
    for line in GOLDEN_CLOUDS.read_text().splitlines():
        digest, filename = line.split()
        entries[filename] = digest
    return entries


# ============= Primitives =============

def test_sphere_matches_brute_force():
    """Test the filled sphere against a per-voxel center test."""
    glass = material_preset("glass")
    grid = build_grid((16, 16, 16), 1.0, [Sphere(material="glass", center=(8.0, 8.0, 8.0), radius=4.0)])
    expected = {
        (x, y, z)
        for x in range(16) for y in range(16) for z in range(16)
        if (x + 0.5 - 8) ** 2 + (y + 0.5 - 8) ** 2 + (z + 0.5 - 8) ** 2 <= 16.0
    }
    assert {c for c, _ in grid.cells()} == expected
    assert all(a == glass for _, a in grid.cells())


def test_air_box_leaves_grid_empty():
    grid = build_grid((8, 8, 8), 1.0, [Box(material="air", min_corner=(0, 0, 0), max_corner=(8, 8, 8))])
    assert len(grid) == 0


def test_box_rejects_inverted_corners():
    with pytest.raises(ValueError):
        Box(material="glass", min_corner=(2, 0, 0), max_corner=(1, 1, 1))


def test_later_primitives_win():
    grid = build_grid((4, 4, 4), 1.0, [
        Slab(material="white_shirt", axis="z", lo=0, hi=1),
        Box(material="mirror", min_corner=(0, 0, 0), max_corner=(1, 1, 1)),
    ])
    assert grid.get((0, 0, 0)) == material_preset("mirror")
    assert grid.get((1, 1, 0)) == material_preset("white_shirt")
    assert grid.get((1, 1, 1)) == AIR


def test_checker_floor_parity():
    """Test 2x2 tiles alternating between the two materials."""
    white, dark = material_preset("white_shirt"), material_preset("dark_shirt")
    grid = VoxelGrid((4, 4, 2))
    rasterize(CheckerFloor(material="white_shirt", material_b="dark_shirt", tile=2), grid)
    assert grid.get((0, 0, 0)) == white
    assert grid.get((1, 1, 0)) == white
    assert grid.get((2, 0, 0)) == dark
    assert grid.get((0, 3, 0)) == dark
    assert grid.get((3, 3, 0)) == white
    assert grid.get((0, 0, 1)) == AIR
    assert len(grid) == 16


def test_fog_region_scales_material():
    fog = FogRegion(min_corner=(0, 0, 0), max_corner=(1, 1, 1), density=0.1)
    smoke = material_preset("smoke_mist").as_tuple()
    expected = tuple(c * 0.1 for c in smoke[:6]) + (smoke[6],)
    assert fog.attributes().as_tuple() == pytest.approx(expected)


def test_resolve_material_values():
    assert resolve_material((0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)).as_tuple() == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
    assert resolve_material("Frosted Glass") == material_preset("frosted_glass")


# ============= Demo scenes =============

def test_list_scenes():
    names = ScenegenService.list_scenes()
    assert names == ["materials_gallery", "mirror_box", "glass_sphere", "fog_room", "day_night_building"]


def test_unknown_scene():
    with pytest.raises(UnknownScene) as exc_info:
        ScenegenService.demo_scene("mirror_bx")
    assert "mirror_box" in exc_info.value.valid


def test_materials_gallery_slabs():
    """Test one slab per preset behind a checker floor, with air leaving its slab empty."""
    demo = ScenegenService.demo_scene("materials_gallery")
    assert list(demo.labels) == ["floor"] + list(GALLERY_ORDER)
    assert len(GALLERY_ORDER) == 14
    per_slab = 2 * 4 * 8
    assert len(demo.grid) == 13 * per_slab + 43 * 24
    for i, name in enumerate(GALLERY_ORDER):
        cell = (3 * i + 1, 14, 1)
        assert demo.grid.get(cell) == material_preset(name)
    assert demo.grid.get((0, 0, 0)) == material_preset("white_shirt")
    assert demo.grid.get((2, 0, 0)) == material_preset("dark_shirt")


def test_demo_scene_shapes():
    assert ScenegenService.demo_scene("mirror_box").grid.dims == (64, 64, 64)
    assert ScenegenService.demo_scene("glass_sphere").grid.dims == (32, 32, 32)
    fog = ScenegenService.demo_scene("fog_room")
    assert fog.grid.get((4, 4, 10)) == fog.labels["fog"].attributes()
    assert list(fog.variants) == ["default"]
    assert fog.variants["default"].cloud == "fog_room.ply"


def test_demo_scene_is_deterministic():
    a = ScenegenService.demo_scene("glass_sphere")
    b = ScenegenService.demo_scene("glass_sphere")
    assert a.grid == b.grid
    assert a.variants == b.variants


@pytest.mark.parametrize("name", ScenegenService.list_scenes())
def test_demo_cloud_matches_golden_hash(name):
    """Test the canonical binary cloud of every demo against its committed digest."""
    data = CloudService.serialize_cloud(ScenegenService.demo_scene(name).grid)
    assert hashlib.sha256(data).hexdigest() == _golden_hashes()[f"{name}.ply"]


def test_day_night_share_cloud():
    """Test that both variants use one cloud and differ only in lighting."""
    demo = ScenegenService.demo_scene("day_night_building")
    day, night = demo.variants["day"], demo.variants["night"]
    assert day.cloud == night.cloud == "day_night_building.ply"
    assert day.camera == night.camera
    assert day.lights != night.lights

    digests = []
    for cfg in (day, night):
        cfg = SceneService.apply_overrides(cfg, spp=1, max_depth=2, width=4, height=4)
        digests.append(render(SceneService.build_scene(cfg, demo.grid)).digest())
    assert digests[0] != digests[1]
