"""Shared builders for tests."""
from voxelight.models import VoxelGrid
from voxelight.schemas import CameraConfig, LightConfig, RenderParams
from voxelight.shading import Scene


def make_scene(grid: VoxelGrid, lights=(), background=(0.0, 0.0, 0.0), width=4, height=4, **render) -> Scene:
    """Tiny scene looking down +y at the middle of ``grid``."""
    sx, sy, sz = grid.extent
    camera = CameraConfig(position=(sx / 2, -3.0 * sy - 1.0, sz / 2), look_at=(sx / 2, sy / 2, sz / 2),
                          width=width, height=height, vfov_deg=30.0)
    return Scene(grid=grid, camera=camera, lights=tuple(lights), background=background,
                 params=RenderParams(**render))


def point_light(position, intensity=1.0) -> LightConfig:
    return LightConfig(kind="point", position=position, rgb=(intensity, intensity, intensity))
