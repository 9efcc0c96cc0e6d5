"""Tests for voxel attributes, the sparse grid and material presets."""
import numpy as np
import pytest

from voxelight.errors import OutOfBounds, OutOfRange, UnknownMaterial
from voxelight.models import (
    AIR,
    MATERIAL_PRESETS,
    VoxelAttributes,
    VoxelGrid,
    grid_get,
    grid_set,
    make_attributes,
    match_preset,
    material_preset,
    voxel_centers,
    voxelize_points,
)


def test_make_attributes_valid():
    """Test building attributes inside the unit interval."""
    attrs = make_attributes(0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.0)
    assert attrs.transmissivity == (0.2, 0.2, 0.2)
    assert attrs.attenuation == (0.2, 0.2, 0.2)
    assert attrs.d == 0.0


@pytest.mark.parametrize("values", [
    (1.2, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, -0.01),
    (0, 0, float("nan"), 0, 0, 0, 0),
])
def test_make_attributes_out_of_range(values):
    """Test that values are rejected rather than clamped."""
    with pytest.raises(OutOfRange):
        make_attributes(*values)


def test_air_is_all_zero():
    assert AIR.as_tuple() == (0.0,) * 7
    assert AIR.is_air
    assert not material_preset("glass").is_air


def test_grid_get_absent_is_air():
    """Test that unset voxels read as air."""
    grid = VoxelGrid((4, 4, 4))
    assert grid_get(grid, (3, 3, 3)) == AIR


def test_grid_set_and_get():
    grid = VoxelGrid((4, 4, 4))
    glass = material_preset("glass")
    grid_set(grid, (1, 2, 3), glass)
    assert grid_get(grid, (1, 2, 3)) == glass
    assert len(grid) == 1


def test_grid_set_air_clears_voxel():
    """Test that writing air removes the stored voxel."""
    grid = VoxelGrid((4, 4, 4))
    grid.set((0, 0, 0), material_preset("mirror"))
    grid.set((0, 0, 0), AIR)
    assert grid.occupied_count == 0


@pytest.mark.parametrize("coord", [(4, 0, 0), (0, -1, 0), (0, 0, 10)])
def test_grid_out_of_bounds(coord):
    grid = VoxelGrid((4, 4, 4))
    with pytest.raises(OutOfBounds):
        grid.get(coord)
    with pytest.raises(OutOfBounds):
        grid.set(coord, material_preset("glass"))


def test_grid_rejects_fractional_coordinates():
    """Test that non-integer coordinates raise instead of truncating to a cell."""
    grid = VoxelGrid((4, 4, 4))
    grid.set((1, 0, 0), material_preset("glass"))
    with pytest.raises(OutOfBounds):
        grid.get((1.7, 0, 0))
    with pytest.raises(OutOfBounds):
        grid.set((0, 0.5, 0), material_preset("mirror"))
    assert grid.get((1.0, 0, 0)) == material_preset("glass")
    assert grid.get(tuple(np.array([1, 0, 0]))) == material_preset("glass")


def test_grid_invalid_dims():
    with pytest.raises(OutOfRange):
        VoxelGrid((0, 4, 4))
    with pytest.raises(OutOfRange):
        VoxelGrid((4, 4, 4), voxel_size=0.0)


def test_cells_canonical_order(mixed_grid: VoxelGrid):
    """Test that occupied cells come out in (z, y, x) order."""
    coords = [c for c, _ in mixed_grid.cells()]
    assert coords == sorted(coords, key=lambda c: (c[2], c[1], c[0]))
    assert coords[0] == (0, 0, 0)
    assert coords[-1] == (4, 3, 2)


def test_grid_copy_and_equality(mixed_grid: VoxelGrid):
    copy = mixed_grid.copy()
    assert copy == mixed_grid
    copy.set((3, 0, 0), material_preset("skin"))
    assert copy != mixed_grid


def test_material_presets_table():
    """Test the fourteen example materials."""
    assert len(MATERIAL_PRESETS) == 14
    assert material_preset("glass").as_tuple() == (0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.0)
    assert material_preset("mirror").as_tuple() == (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0)
    assert material_preset("air") == AIR
    assert material_preset("Red Shirt") == material_preset("red_shirt")
    assert material_preset("smoke/mist") == material_preset("smoke_mist")


def test_unknown_material():
    with pytest.raises(UnknownMaterial) as exc_info:
        material_preset("unobtainium")
    assert "unobtainium" in str(exc_info.value)


def test_match_preset():
    assert match_preset(material_preset("brass")) == "brass"
    assert match_preset(VoxelAttributes(0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3)) is None


def test_voxelize_points_snaps_and_drops():
    """Test snapping scene points to voxels, dropping points outside the grid."""
    glass = material_preset("glass")
    points = [(0.1, 0.1, 0.1), (1.9, 0.4, 0.0), (2.5, 0.0, 0.0), (-0.1, 0.0, 0.0)]
    grid = voxelize_points(points, glass, dims=(4, 4, 4), voxel_size=0.5)
    assert {c for c, _ in grid.cells()} == {(0, 0, 0), (3, 0, 0)}


def test_voxelize_points_last_wins():
    attrs = [material_preset("glass"), material_preset("mirror")]
    grid = voxelize_points([(0.2, 0.2, 0.2), (0.7, 0.7, 0.7)], attrs, dims=(2, 2, 2))
    assert grid.get((0, 0, 0)) == material_preset("mirror")


def test_voxel_centers(mixed_grid: VoxelGrid):
    centers = voxel_centers(mixed_grid)
    assert centers.shape == (4, 3)
    np.testing.assert_allclose(centers[0], [0.25, 0.25, 0.25])
    np.testing.assert_allclose(centers[-1], [2.25, 1.75, 1.25])
