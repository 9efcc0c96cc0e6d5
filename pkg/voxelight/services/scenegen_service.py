"""Synthetic volumetric clouds: filled primitives and named demo scenes."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from voxelight.errors import UnknownScene
from voxelight.models import VoxelAttributes, VoxelGrid, material_preset
from voxelight.schemas import CameraConfig, LightConfig, RenderParams, SceneConfig, Vec3

logger = logging.getLogger(__name__)

AttributeValues = Tuple[float, float, float, float, float, float, float]
MaterialSpec = Union[str, AttributeValues]


def resolve_material(material: MaterialSpec) -> VoxelAttributes:
    """Preset name or seven explicit attribute values."""
    if isinstance(material, str):
        return material_preset(material)
    return VoxelAttributes.from_sequence(material)


# ============= Primitives =============

class _Primitive(BaseModel):
    """Solid filled at every voxel whose center lies inside it (voxel units)."""
    material: MaterialSpec

    model_config = ConfigDict(extra="forbid", frozen=True)

    def attributes(self) -> VoxelAttributes:
        return resolve_material(self.material)

    def mask(self, cx: np.ndarray, cy: np.ndarray, cz: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Sphere(_Primitive):
    kind: Literal["sphere"] = "sphere"
    center: Vec3
    radius: float = Field(..., gt=0.0)

    def mask(self, cx, cy, cz):
        x0, y0, z0 = self.center
        return (cx - x0) ** 2 + (cy - y0) ** 2 + (cz - z0) ** 2 <= self.radius ** 2


class Box(_Primitive):
    kind: Literal["box"] = "box"
    min_corner: Vec3
    max_corner: Vec3

    @model_validator(mode="after")
    def validate_corners(self) -> "Box":
        if any(lo > hi for lo, hi in zip(self.min_corner, self.max_corner)):
            raise ValueError("min_corner must not exceed max_corner")
        return self

    def mask(self, cx, cy, cz):
        lo, hi = self.min_corner, self.max_corner
        return ((cx >= lo[0]) & (cx <= hi[0]) & (cy >= lo[1]) & (cy <= hi[1])
                & (cz >= lo[2]) & (cz <= hi[2]))


class Slab(_Primitive):
    """Infinite layer between two planes normal to one axis."""
    kind: Literal["slab"] = "slab"
    axis: Literal["x", "y", "z"] = "z"
    lo: float
    hi: float

    def mask(self, cx, cy, cz):
        c = {"x": cx, "y": cy, "z": cz}[self.axis]
        return (c >= self.lo) & (c <= self.hi)


class FogRegion(Box):
    """Box of thin participating medium.

    ``density`` scales the base material's transmissivity and attenuation, so
    low densities approach air.
    """
    kind: Literal["fog_region"] = "fog_region"
    material: MaterialSpec = "smoke_mist"
    density: float = Field(0.1, gt=0.0, le=1.0)

    def attributes(self) -> VoxelAttributes:
        base = resolve_material(self.material)
        v = base.as_tuple()
        return VoxelAttributes(*(c * self.density for c in v[:6]), v[6])


class CheckerFloor(_Primitive):
    """Horizontal layer of alternating square tiles."""
    kind: Literal["checker_floor"] = "checker_floor"
    material_b: MaterialSpec
    z_lo: float = 0.0
    z_hi: float = 1.0
    tile: int = Field(2, ge=1)

    def mask(self, cx, cy, cz):
        return (cz >= self.z_lo) & (cz <= self.z_hi)

    def is_even(self, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
        return (ix // self.tile + iy // self.tile) % 2 == 0


Primitive = Union[Sphere, Box, Slab, FogRegion, CheckerFloor]


def rasterize(primitive: Primitive, grid: VoxelGrid) -> VoxelGrid:
    """Volumetric fill clipped to the grid; overwrites what is already there."""
    ix, iy, iz = np.indices(grid.dims)
    inside = primitive.mask(ix + 0.5, iy + 0.5, iz + 0.5)
    if isinstance(primitive, CheckerFloor):
        even = primitive.is_even(ix, iy)
        parts = [(inside & even, primitive.attributes()),
                 (inside & ~even, resolve_material(primitive.material_b))]
    else:
        parts = [(inside, primitive.attributes())]
    for selected, attrs in parts:
        for coord in np.argwhere(selected).tolist():
            grid.set(coord, attrs)
    return grid


def build_grid(dims: Sequence[int], voxel_size: float, primitives: Sequence[Primitive]) -> VoxelGrid:
    """Rasterize primitives in painter's order: later ones win."""
    grid = VoxelGrid(dims, voxel_size)
    for primitive in primitives:
        rasterize(primitive, grid)
    return grid


# ============= Demo scenes =============

@dataclass(frozen=True)
class DemoScene:
    """One cloud plus every lighting variant rendered from it."""
    name: str
    grid: VoxelGrid
    variants: Dict[str, SceneConfig]
    labels: Dict[str, Primitive] = field(default_factory=dict)


def _scene(name: str, camera: CameraConfig, lights: List[LightConfig],
           background: Vec3 = (0.0, 0.0, 0.0)) -> SceneConfig:
    return SceneConfig(camera=camera, lights=lights, background=background,
                       render=RenderParams(), cloud=f"{name}.ply")


def _sun(direction: Vec3, rgb: Vec3 = (1.0, 1.0, 1.0)) -> LightConfig:
    return LightConfig(kind="directional", direction=direction, rgb=rgb)


def _ambient(rgb: Vec3) -> LightConfig:
    return LightConfig(kind="ambient", rgb=rgb)


def _point(position: Vec3, rgb: Vec3) -> LightConfig:
    return LightConfig(kind="point", position=position, rgb=rgb)


GALLERY_ORDER = (
    "white_shirt", "dark_shirt", "red_shirt", "green_shirt", "blue_shirt", "color_shirt", "skin",
    "brass", "glass", "frosted_glass", "water", "mirror", "air", "smoke_mist",
)


def _materials_gallery() -> DemoScene:
    labels: Dict[str, Primitive] = {
        "floor": CheckerFloor(material="white_shirt", material_b="dark_shirt", z_lo=0, z_hi=1),
    }
    for i, name in enumerate(GALLERY_ORDER):
        labels[name] = Box(material=name, min_corner=(3 * i + 1, 14, 1), max_corner=(3 * i + 3, 18, 9))
    grid = build_grid((43, 24, 10), 1.0, list(labels.values()))
    camera = CameraConfig(position=(21.5, -20.0, 30.0), look_at=(21.5, 12.0, 3.0),
                          vfov_deg=32.0, width=96, height=48)
    lights = [_sun((0.3, 1.0, -0.6)), _ambient((0.1, 0.1, 0.1))]
    return DemoScene("materials_gallery", grid, {"default": _scene("materials_gallery", camera, lights)}, labels)


def _mirror_box() -> DemoScene:
    labels: Dict[str, Primitive] = {
        "floor": CheckerFloor(material="white_shirt", material_b="dark_shirt", z_lo=0, z_hi=2, tile=4),
        "mirror_wall": Box(material="mirror", min_corner=(4, 56, 2), max_corner=(60, 60, 40)),
        "glass_sphere": Sphere(material="glass", center=(32.0, 30.0, 14.0), radius=10.0),
    }
    grid = build_grid((64, 64, 64), 1.0, list(labels.values()))
    camera = CameraConfig(position=(32.0, -40.0, 30.0), look_at=(32.0, 32.0, 12.0), vfov_deg=50.0)
    lights = [_point((20.0, 10.0, 50.0), (2500.0, 2500.0, 2500.0)), _ambient((0.05, 0.05, 0.05))]
    return DemoScene("mirror_box", grid, {"default": _scene("mirror_box", camera, lights, (0.1, 0.1, 0.15))},
                     labels)


def _glass_sphere() -> DemoScene:
    labels: Dict[str, Primitive] = {
        "floor": CheckerFloor(material="red_shirt", material_b="white_shirt", z_lo=0, z_hi=2),
        "sphere": Sphere(material="glass", center=(16.0, 16.0, 10.0), radius=6.0),
    }
    grid = build_grid((32, 32, 32), 1.0, list(labels.values()))
    camera = CameraConfig(position=(16.0, -20.0, 18.0), look_at=(16.0, 16.0, 8.0), vfov_deg=45.0)
    lights = [_sun((-0.4, 0.5, -1.0)), _ambient((0.1, 0.1, 0.1))]
    return DemoScene("glass_sphere", grid, {"default": _scene("glass_sphere", camera, lights, (0.3, 0.4, 0.6))},
                     labels)


def _fog_room() -> DemoScene:
    labels: Dict[str, Primitive] = {
        "fog": FogRegion(min_corner=(0, 0, 2), max_corner=(32, 28, 24), density=0.05),
        "floor": Slab(material="white_shirt", axis="z", lo=0, hi=2),
        "back_wall": Slab(material="green_shirt", axis="y", lo=28, hi=32),
        "block": Box(material="red_shirt", min_corner=(12, 12, 2), max_corner=(20, 20, 10)),
    }
    grid = build_grid((32, 32, 24), 1.0, list(labels.values()))
    camera = CameraConfig(position=(16.0, -24.0, 14.0), look_at=(16.0, 16.0, 6.0), vfov_deg=45.0)
    lights = [_point((16.0, 8.0, 22.0), (300.0, 300.0, 280.0)), _ambient((0.05, 0.05, 0.05))]
    return DemoScene("fog_room", grid, {"default": _scene("fog_room", camera, lights)}, labels)


def _day_night_building() -> DemoScene:
    labels: Dict[str, Primitive] = {
        "ground": Slab(material="dark_shirt", axis="z", lo=0, hi=1),
        "building": Box(material="white_shirt", min_corner=(16, 16, 1), max_corner=(32, 32, 30)),
        "roof": Box(material="brass", min_corner=(15, 15, 30), max_corner=(33, 33, 32)),
    }
    for level, z in enumerate((5, 12, 19, 26)):
        labels[f"window_{level}"] = Box(material="glass", min_corner=(19, 16, z), max_corner=(29, 18, z + 3))
    grid = build_grid((48, 48, 36), 1.0, list(labels.values()))
    camera = CameraConfig(position=(24.0, -30.0, 20.0), look_at=(24.0, 24.0, 16.0), vfov_deg=50.0)
    day = _scene("day_night_building", camera,
                 [_sun((0.4, 0.6, -0.7), (1.0, 0.95, 0.85)), _ambient((0.2, 0.22, 0.25))],
                 (0.5, 0.7, 1.0))
    night = _scene("day_night_building", camera,
                   [_point((24.0, 6.0, 10.0), (150.0, 130.0, 80.0)), _ambient((0.02, 0.02, 0.04))],
                   (0.01, 0.01, 0.03))
    return DemoScene("day_night_building", grid, {"day": day, "night": night}, labels)


DEMO_SCENES: Dict[str, Callable[[], DemoScene]] = {
    "materials_gallery": _materials_gallery,
    "mirror_box": _mirror_box,
    "glass_sphere": _glass_sphere,
    "fog_room": _fog_room,
    "day_night_building": _day_night_building,
}


class ScenegenService:
    """Service for synthetic scene generation."""

    @staticmethod
    def list_scenes() -> List[str]:
        return list(DEMO_SCENES)

    @staticmethod
    def demo_scene(name: str) -> DemoScene:
        """Deterministic grid and scene configs for a named demo."""
        builder = DEMO_SCENES.get(name)
        if builder is None:
            raise UnknownScene(name, list(DEMO_SCENES))
        scene = builder()
        logger.info("generated %s: %d voxels in %s", name, len(scene.grid), scene.grid.dims)
        return scene
