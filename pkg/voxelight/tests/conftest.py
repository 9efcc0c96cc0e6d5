"""Test configuration and fixtures."""
from contextlib import asynccontextmanager

import pytest
from fastapi.testclient import TestClient

from voxelight.main import create_app
from voxelight.models import VoxelGrid, material_preset


@asynccontextmanager
async def test_lifespan(app):
    """Test lifespan without startup logging."""
    yield


@pytest.fixture(scope="function")
def client():
    """Create a test client on a fresh app."""
    test_app = create_app(app_lifespan=test_lifespan)
    with TestClient(test_app) as test_client:
        yield test_client


@pytest.fixture
def glass_grid() -> VoxelGrid:
    """4x4x4 grid with a single glass voxel at (1, 2, 3)."""
    grid = VoxelGrid((4, 4, 4), 1.0)
    grid.set((1, 2, 3), material_preset("glass"))
    return grid


@pytest.fixture
def mixed_grid() -> VoxelGrid:
    grid = VoxelGrid((5, 4, 3), 0.5)
    grid.set((0, 0, 0), material_preset("red_shirt"))
    grid.set((4, 3, 2), material_preset("mirror"))
    grid.set((2, 1, 0), material_preset("smoke_mist"))
    grid.set((1, 3, 1), material_preset("water"))
    return grid


@pytest.fixture
def scene_doc() -> dict:
    """Minimal scene document: camera, one point light and a cloud path."""
    return {
        "camera": {"position": [2.0, -6.0, 2.0], "look_at": [2.0, 2.0, 2.0], "width": 4, "height": 4},
        "lights": [{"kind": "point", "position": [2.0, -4.0, 6.0], "rgb": [20.0, 20.0, 20.0]}],
        "cloud": "cloud.ply",
    }
