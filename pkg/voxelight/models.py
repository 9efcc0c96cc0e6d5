"""Voxel attribute model: the seven-attribute payload, the sparse grid and material presets."""
import enum
import math
from dataclasses import astuple, dataclass, fields
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from voxelight.errors import OutOfBounds, OutOfRange, UnknownMaterial

ATTRIBUTE_NAMES = ("r_t", "g_t", "b_t", "r_a", "g_a", "b_a", "d")


class Encoding(str, enum.Enum):
    """Cloud body encoding."""
    ASCII = "ascii"
    BINARY = "binary_little_endian"


class Quantization(str, enum.Enum):
    """Cloud attribute storage type."""
    FLOAT32 = "float32"
    UINT8 = "uint8"


class LightKind(str, enum.Enum):
    """Light source type."""
    POINT = "point"
    DIRECTIONAL = "directional"
    AMBIENT = "ambient"


@dataclass(frozen=True)
class VoxelAttributes:
    """Per-voxel material description.

    ``*_t`` is transmissivity (0 = all light enters, 1 = all reflected),
    ``*_a`` is attenuation (0 = no absorption, 1 = fully absorbed) and ``d``
    is diffuseness (0 = perfect specularity, 1 = Lambertian).
    """

    r_t: float = 0.0
    g_t: float = 0.0
    b_t: float = 0.0
    r_a: float = 0.0
    g_a: float = 0.0
    b_a: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            # also rejects NaN
            if not (0.0 <= value <= 1.0):
                raise OutOfRange(f.name, value)
            object.__setattr__(self, f.name, float(value))

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "VoxelAttributes":
        if len(values) != len(ATTRIBUTE_NAMES):
            raise ValueError(f"expected {len(ATTRIBUTE_NAMES)} attribute values, got {len(values)}")
        return cls(*values)

    @property
    def transmissivity(self) -> Tuple[float, float, float]:
        return (self.r_t, self.g_t, self.b_t)

    @property
    def attenuation(self) -> Tuple[float, float, float]:
        return (self.r_a, self.g_a, self.b_a)

    @property
    def is_air(self) -> bool:
        return self == AIR

    def as_tuple(self) -> Tuple[float, ...]:
        return astuple(self)


AIR = VoxelAttributes()


def make_attributes(r_t: float, g_t: float, b_t: float,
                    r_a: float, g_a: float, b_a: float, d: float) -> VoxelAttributes:
    """Build attributes, raising OutOfRange instead of clamping."""
    return VoxelAttributes(r_t, g_t, b_t, r_a, g_a, b_a, d)


class VoxelCoord(NamedTuple):
    """Integer voxel indices."""
    x: int
    y: int
    z: int


CoordLike = Union[VoxelCoord, Tuple[int, int, int], Sequence[int]]


class VoxelGrid:
    """Bounded sparse grid. Only non-air voxels are stored.

    Voxel ``(i, j, k)`` occupies ``[i, i+1) x [j, j+1) x [k, k+1)`` times
    ``voxel_size`` in scene units, so the grid spans ``[0, dims * voxel_size]``.
    Built by a single writer; renderers only read it.
    """

    __slots__ = ("dims", "voxel_size", "_cells")

    def __init__(self, dims: Sequence[int], voxel_size: float = 1.0,
                 cells: Optional[Dict[CoordLike, VoxelAttributes]] = None):
        if len(dims) != 3 or any(int(n) != n or n <= 0 for n in dims):
            raise OutOfRange("dims", tuple(dims))
        if not (voxel_size > 0.0 and math.isfinite(voxel_size)):
            raise OutOfRange("voxel_size", voxel_size)
        self.dims: Tuple[int, int, int] = (int(dims[0]), int(dims[1]), int(dims[2]))
        self.voxel_size = float(voxel_size)
        self._cells: Dict[VoxelCoord, VoxelAttributes] = {}
        for coord, attrs in (cells or {}).items():
            self.set(coord, attrs)

    def in_bounds(self, c: CoordLike) -> bool:
        x, y, z = c
        return 0 <= x < self.dims[0] and 0 <= y < self.dims[1] and 0 <= z < self.dims[2]

    def _check(self, c: CoordLike) -> VoxelCoord:
        if len(c) != 3 or not self.in_bounds(c) or any(int(v) != v for v in c):
            raise OutOfBounds(c)
        return VoxelCoord(int(c[0]), int(c[1]), int(c[2]))

    def get(self, c: CoordLike) -> VoxelAttributes:
        """Stored attributes, or air for an absent voxel."""
        return self._cells.get(self._check(c), AIR)

    def lookup(self, x: int, y: int, z: int) -> VoxelAttributes:
        """Unchecked read for hot loops; out-of-grid reads return air."""
        return self._cells.get((x, y, z), AIR)

    def set(self, c: CoordLike, attrs: VoxelAttributes) -> "VoxelGrid":
        coord = self._check(c)
        if attrs == AIR:
            self._cells.pop(coord, None)
        else:
            self._cells[coord] = attrs
        return self

    @property
    def occupied_count(self) -> int:
        return len(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    @property
    def extent(self) -> Tuple[float, float, float]:
        """Scene-space size of the grid box."""
        return tuple(n * self.voxel_size for n in self.dims)

    def cells(self) -> Iterator[Tuple[VoxelCoord, VoxelAttributes]]:
        """Occupied cells in canonical (z, y, x) lexicographic order."""
        for coord in sorted(self._cells, key=lambda c: (c[2], c[1], c[0])):
            yield coord, self._cells[coord]

    def copy(self) -> "VoxelGrid":
        grid = VoxelGrid(self.dims, self.voxel_size)
        grid._cells = dict(self._cells)
        return grid

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (self.dims == other.dims and self.voxel_size == other.voxel_size
                and self._cells == other._cells)

    def __repr__(self) -> str:
        return f"VoxelGrid(dims={self.dims}, voxel_size={self.voxel_size}, occupied={len(self)})"


def grid_get(grid: VoxelGrid, c: CoordLike) -> VoxelAttributes:
    return grid.get(c)


def grid_set(grid: VoxelGrid, c: CoordLike, a: VoxelAttributes) -> VoxelGrid:
    return grid.set(c, a)


def voxelize_points(points: Iterable[Sequence[float]],
                    attrs: Union[VoxelAttributes, Sequence[VoxelAttributes]],
                    dims: Sequence[int], voxel_size: float = 1.0) -> VoxelGrid:
    """Snap a non-voxelized point list onto a grid.

    Points outside the grid are dropped; on collisions the later point wins.
    """
    grid = VoxelGrid(dims, voxel_size)
    pts = np.asarray(list(points), dtype=np.float64).reshape(-1, 3)
    idx = np.floor(pts / grid.voxel_size).astype(np.int64)
    if isinstance(attrs, VoxelAttributes):
        per_point: List[VoxelAttributes] = [attrs] * len(idx)
    else:
        per_point = list(attrs)
        if len(per_point) != len(idx):
            raise ValueError("one attribute set per point is required")
    for (x, y, z), a in zip(idx.tolist(), per_point):
        if grid.in_bounds((x, y, z)):
            grid.set((x, y, z), a)
    return grid


def voxel_centers(grid: VoxelGrid) -> np.ndarray:
    """Scene-space centers of occupied voxels, canonical order."""
    coords = [c for c, _ in grid.cells()]
    if not coords:
        return np.zeros((0, 3))
    return (np.asarray(coords, dtype=np.float64) + 0.5) * grid.voxel_size


# ============= Material presets =============

@dataclass(frozen=True)
class MaterialPreset:
    """Named example material."""
    name: str
    attrs: VoxelAttributes


# Example parameters for a few materials. Values are illustrative, not measured.
MATERIAL_PRESETS: Dict[str, MaterialPreset] = {
    name: MaterialPreset(name, VoxelAttributes(*values))
    for name, values in (
        ("white_shirt", (0.8, 0.8, 0.8, 1.0, 1.0, 1.0, 1.0)),
        ("dark_shirt", (0.2, 0.2, 0.2, 1.0, 1.0, 1.0, 1.0)),
        ("red_shirt", (0.8, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0)),
        ("green_shirt", (0.0, 0.8, 0.0, 1.0, 1.0, 1.0, 1.0)),
        ("blue_shirt", (0.0, 0.0, 0.8, 1.0, 1.0, 1.0, 1.0)),
        ("color_shirt", (0.8, 0.5, 0.2, 1.0, 1.0, 1.0, 1.0)),
        ("skin", (0.5, 0.5, 0.2, 0.8, 1.0, 1.0, 0.8)),
        ("brass", (0.8, 0.8, 0.2, 1.0, 1.0, 1.0, 0.2)),
        ("glass", (0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.0)),
        ("frosted_glass", (0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.8)),
        ("water", (0.2, 0.2, 0.5, 0.2, 0.2, 0.2, 0.0)),
        ("mirror", (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0)),
        ("air", (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)),
        ("smoke_mist", (0.5, 0.5, 0.5, 0.2, 0.2, 0.2, 0.5)),
    )
}


def normalize_material_name(name: str) -> str:
    """Case-insensitive, spaces and slashes become underscores."""
    return "_".join(name.strip().lower().replace("/", " ").split())


def material_preset(name: str) -> VoxelAttributes:
    preset = MATERIAL_PRESETS.get(normalize_material_name(name))
    if preset is None:
        raise UnknownMaterial(name)
    return preset.attrs


def match_preset(attrs: VoxelAttributes) -> Optional[str]:
    """Name of the preset with exactly these attributes, if any."""
    for preset in MATERIAL_PRESETS.values():
        if preset.attrs == attrs:
            return preset.name
    return None
