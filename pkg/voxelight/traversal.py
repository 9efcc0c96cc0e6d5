"""Voxel walk (3D DDA) and material interface detection."""
import math
from dataclasses import dataclass, replace
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

from voxelight.errors import InvalidRay
from voxelight.models import AIR, VoxelAttributes, VoxelCoord, VoxelGrid

Vec3 = Tuple[float, float, float]

DIR_TOLERANCE = 1e-12


def _axis_normal(axis: int, sign: float) -> Vec3:
    n = [0.0, 0.0, 0.0]
    n[axis] = sign
    return (n[0], n[1], n[2])


@dataclass(frozen=True)
class Ray:
    """Parametric ray origin + t * dir, t in [t_min, t_max]."""
    origin: Vec3
    dir: Vec3
    t_min: float = 0.0
    t_max: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        object.__setattr__(self, "dir", tuple(float(c) for c in self.dir))
        length = math.sqrt(sum(c * c for c in self.dir))
        if abs(length - 1.0) > DIR_TOLERANCE:
            raise InvalidRay(f"ray direction has length {length!r}, expected 1")
        if not (0.0 <= self.t_min < self.t_max):
            raise InvalidRay(f"empty parametric range [{self.t_min}, {self.t_max}]")

    @classmethod
    def toward(cls, origin: Sequence[float], direction: Sequence[float],
               t_min: float = 0.0, t_max: float = math.inf) -> "Ray":
        """Build a ray, normalizing the direction."""
        length = math.sqrt(sum(float(c) * float(c) for c in direction))
        if length == 0.0 or not math.isfinite(length):
            raise InvalidRay("ray direction must be non-zero")
        return cls(tuple(origin), tuple(float(c) / length for c in direction), t_min, t_max)

    def at(self, t: float) -> Vec3:
        o, d = self.origin, self.dir
        return (o[0] + t * d[0], o[1] + t * d[1], o[2] + t * d[2])


@dataclass(frozen=True)
class TraversalEvent:
    """One visited cell and the face the ray entered it through."""
    cell: VoxelCoord
    t_enter: float
    t_exit: float
    entry_face_normal: Vec3


@dataclass(frozen=True)
class InterfaceEvent:
    """Face crossing where the attributes change.

    ``normal`` points back toward the incoming ray (normal . dir < 0).
    ``from_cell``/``to_cell`` are None outside the grid, which is air.
    """
    position: Vec3
    normal: Vec3
    from_attrs: VoxelAttributes
    to_attrs: VoxelAttributes
    t: float
    from_cell: Optional[VoxelCoord]
    to_cell: Optional[VoxelCoord]


class _Clip(NamedTuple):
    t0: float
    t1: float
    entry_axis: int
    exit_axis: int


def _clip(ray: Ray, grid: VoxelGrid) -> Optional[_Clip]:
    """Intersect the ray range with the grid box (slab test)."""
    t0, t1 = ray.t_min, ray.t_max
    entry_axis = exit_axis = -1
    s = grid.voxel_size
    for axis in range(3):
        o = ray.origin[axis]
        d = ray.dir[axis]
        hi = grid.dims[axis] * s
        if d == 0.0:
            if o < 0.0 or o >= hi:
                return None
            continue
        ta = -o / d
        tb = (hi - o) / d
        near, far = (ta, tb) if ta < tb else (tb, ta)
        if near > t0:
            t0, entry_axis = near, axis
        if far < t1:
            t1, exit_axis = far, axis
    if t0 >= t1:
        return None
    return _Clip(t0, t1, entry_axis, exit_axis)


def _dominant_axis(d: Vec3) -> int:
    ax = 0
    if abs(d[1]) > abs(d[ax]):
        ax = 1
    if abs(d[2]) > abs(d[ax]):
        ax = 2
    return ax


def walk(ray: Ray, grid: VoxelGrid) -> Iterator[TraversalEvent]:
    """Lazily yield the cells pierced by the ray in increasing t.

    Ties between axes advance x before y before z. Cells touched only at an
    edge or corner (zero length) are not emitted.
    """
    clip = _clip(ray, grid)
    if clip is None:
        return
    t0, t1, entry_axis, _ = clip
    s = grid.voxel_size
    o, d, dims = ray.origin, ray.dir, grid.dims

    cell = [0, 0, 0]
    step = [0, 0, 0]
    for axis in range(3):
        p = o[axis] + t0 * d[axis]
        cell[axis] = min(max(int(math.floor(p / s)), 0), dims[axis] - 1)
        step[axis] = 1 if d[axis] > 0.0 else (-1 if d[axis] < 0.0 else 0)
    if entry_axis >= 0:
        cell[entry_axis] = 0 if step[entry_axis] > 0 else dims[entry_axis] - 1
        normal = _axis_normal(entry_axis, -float(step[entry_axis]))
    else:
        dom = _dominant_axis(d)
        normal = _axis_normal(dom, -float(step[dom]))

    def next_crossing(axis: int) -> float:
        if step[axis] == 0:
            return math.inf
        boundary = (cell[axis] + (1 if step[axis] > 0 else 0)) * s
        return (boundary - o[axis]) / d[axis]

    t_next = [next_crossing(0), next_crossing(1), next_crossing(2)]
    t_enter = t0
    while True:
        ax = 0
        if t_next[1] < t_next[ax]:
            ax = 1
        if t_next[2] < t_next[ax]:
            ax = 2
        t_exit = min(t_next[ax], t1)
        if t_exit > t_enter:
            yield TraversalEvent(VoxelCoord(cell[0], cell[1], cell[2]), t_enter, t_exit, normal)
            t_enter = t_exit
        if t_next[ax] >= t1:
            return
        cell[ax] += step[ax]
        if not 0 <= cell[ax] < dims[ax]:
            return
        normal = _axis_normal(ax, -float(step[ax]))
        t_next[ax] = next_crossing(ax)


def traverse(ray: Ray, grid: VoxelGrid) -> List[TraversalEvent]:
    """Every cell the ray crosses inside the grid, in order; empty on a miss."""
    return list(walk(ray, grid))


def next_interface(ray: Ray, grid: VoxelGrid, from_t: Optional[float] = None) -> Optional[InterfaceEvent]:
    """First face crossing after ``from_t`` where the attributes change.

    Entering the grid into a non-air voxel and leaving it from one both count,
    since everything outside the grid is air.
    """
    start = ray.t_min if from_t is None else max(from_t, ray.t_min)
    if start >= ray.t_max:
        return None
    sub = ray if start == ray.t_min else replace(ray, t_min=start)
    clip = _clip(sub, grid)
    if clip is None:
        return None

    prev_attrs: Optional[VoxelAttributes] = None
    prev_cell: Optional[VoxelCoord] = None
    for ev in walk(sub, grid):
        attrs = grid.lookup(*ev.cell)
        if prev_attrs is None and ev.t_enter <= start:
            prev_attrs, prev_cell = attrs, ev.cell
            continue
        if prev_attrs is None:
            prev_attrs = AIR
        if attrs != prev_attrs:
            return InterfaceEvent(position=sub.at(ev.t_enter), normal=ev.entry_face_normal,
                                  from_attrs=prev_attrs, to_attrs=attrs, t=ev.t_enter,
                                  from_cell=prev_cell, to_cell=ev.cell)
        prev_attrs, prev_cell = attrs, ev.cell

    if prev_attrs is None or prev_attrs == AIR or clip.exit_axis < 0:
        return None
    axis = clip.exit_axis
    sign = 1.0 if sub.dir[axis] > 0.0 else -1.0
    return InterfaceEvent(position=sub.at(clip.t1), normal=_axis_normal(axis, -sign),
                          from_attrs=prev_attrs, to_attrs=AIR, t=clip.t1,
                          from_cell=prev_cell, to_cell=None)
