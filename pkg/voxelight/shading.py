"""Deterministic stochastic ray tracer over voxel attribute grids.

Light is traced as scalar per-channel radiance. At every face where the
attributes change the transmissivities give per-channel Fresnel reflectance,
the diffuseness perturbs the outgoing directions and the attenuation of each
crossed voxel scales the throughput. Every sample owns a counter-based
(Philox) stream keyed by (seed, pixel, sample), and every branch of the path
tree derives its own child stream, so results do not depend on how pixels are
distributed over workers.
"""
import hashlib
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from voxelight.errors import OutOfRange
from voxelight.models import AIR, LightKind, VoxelAttributes, VoxelGrid
from voxelight.optics import (
    DEFAULT_MAPPING,
    ScatterLobe,
    attenuation_transmittance,
    channel_optics,
    geometric_permittivity,
    interface,
    reflect_dir,
    reflectance_unpolarized,
    refract_dir,
    scatter_lobe,
)
from voxelight.schemas import CameraConfig, LightConfig, MappingConfig, RenderParams
from voxelight.traversal import InterfaceEvent, Ray, next_interface

logger = logging.getLogger(__name__)

Vec3 = Tuple[float, float, float]

# Paths shallower than this split deterministically into both branches.
SPLIT_DEPTH = 3
# Spawned rays start this far (in voxel sizes) off the interface.
SURFACE_EPS = 1e-6
MAX_RESAMPLE = 64
TILE_ROWS = 8

ZERO = np.zeros(3)
ONE = np.ones(3)


# ============= Scene types =============

@dataclass(frozen=True)
class Scene:
    """Grid plus everything the cloud does not carry: lights, camera, sampling."""
    grid: VoxelGrid
    camera: CameraConfig
    lights: Tuple[LightConfig, ...] = ()
    background: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    params: RenderParams = field(default_factory=RenderParams)
    mapping: MappingConfig = DEFAULT_MAPPING

    def __post_init__(self):
        object.__setattr__(self, "lights", tuple(self.lights))
        object.__setattr__(self, "background", tuple(float(c) for c in self.background))


@dataclass(frozen=True)
class Framebuffer:
    """Linear HDR radiance, row 0 at the top."""
    width: int
    height: int
    hdr: np.ndarray

    def __post_init__(self):
        if self.hdr.shape != (self.height, self.width, 3):
            raise ValueError(f"framebuffer shape {self.hdr.shape} != {(self.height, self.width, 3)}")
        if not np.all(np.isfinite(self.hdr)) or np.any(self.hdr < 0.0):
            raise ValueError("framebuffer values must be finite and >= 0")

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.hdr, dtype="<f8").tobytes()).hexdigest()


# ============= Small vector helpers =============

def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Sequence[float], b: Sequence[float]) -> Vec3:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _normalize(v: Sequence[float]) -> Vec3:
    n = math.sqrt(_dot(v, v))
    return (v[0] / n, v[1] / n, v[2] / n)


def _offset(p: Sequence[float], n: Sequence[float], eps: float) -> Vec3:
    return (p[0] + eps * n[0], p[1] + eps * n[1], p[2] + eps * n[2])


def _onb(n: Sequence[float]) -> Tuple[Vec3, Vec3]:
    """Branchless orthonormal basis around a unit vector."""
    sign = math.copysign(1.0, n[2])
    a = -1.0 / (sign + n[2])
    b = n[0] * n[1] * a
    return ((1.0 + sign * n[0] * n[0] * a, sign * b, -sign * n[0]),
            (b, sign + n[1] * n[1] * a, -n[1]))


def _from_local(n: Sequence[float], x: float, y: float, z: float) -> Vec3:
    t, bt = _onb(n)
    return _normalize((x * t[0] + y * bt[0] + z * n[0],
                       x * t[1] + y * bt[1] + z * n[1],
                       x * t[2] + y * bt[2] + z * n[2]))


# ============= Random streams =============

def make_rng(seed: int, pixel_index: int, sample_index: int) -> np.random.Generator:
    """Counter-based stream owned by one (pixel, sample)."""
    key = (int(seed) << 64) | ((int(pixel_index) & 0xFFFFFFFF) << 32) | (int(sample_index) & 0xFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def _child_rng(rng: np.random.Generator, tag: int) -> np.random.Generator:
    key = int(rng.integers(0, 2 ** 62)) * 4 + tag
    return np.random.Generator(np.random.Philox(key=key))


# ============= Sampling =============

def sample_cosine_hemisphere(normal: Sequence[float], rng: np.random.Generator) -> Vec3:
    u1 = rng.random()
    u2 = rng.random()
    r = math.sqrt(u1)
    phi = 2.0 * math.pi * u2
    return _from_local(normal, r * math.cos(phi), r * math.sin(phi), math.sqrt(max(0.0, 1.0 - u1)))


def sample_phong_lobe(axis: Sequence[float], exponent: float, rng: np.random.Generator) -> Vec3:
    u1 = rng.random()
    u2 = rng.random()
    cos_a = u1 ** (1.0 / (exponent + 1.0))
    sin_a = math.sqrt(max(0.0, 1.0 - cos_a * cos_a))
    phi = 2.0 * math.pi * u2
    return _from_local(axis, sin_a * math.cos(phi), sin_a * math.sin(phi), cos_a)


def sample_scatter(incident_dir: Sequence[float], normal: Sequence[float], base_dir: Sequence[float],
                   lobe: ScatterLobe, rng: np.random.Generator) -> Sequence[float]:
    """Perturb a specular direction according to the scattering lobe.

    With probability ``lambert_weight`` the result is cosine-distributed in
    the hemisphere of ``base_dir``; otherwise it is a Phong-lobe sample about
    ``base_dir`` that never crosses the surface. A delta lobe returns
    ``base_dir`` untouched.
    """
    if lobe.is_delta:
        return base_dir
    side = _dot(base_dir, normal)
    if side == 0.0:
        side = -_dot(incident_dir, normal)
    h = tuple(normal) if side >= 0.0 else (-normal[0], -normal[1], -normal[2])
    if rng.random() < lobe.lambert_weight:
        return sample_cosine_hemisphere(h, rng)
    for _ in range(MAX_RESAMPLE):
        candidate = sample_phong_lobe(base_dir, lobe.phong_exponent, rng)
        if _dot(candidate, h) > 0.0:
            return candidate
    return base_dir


# ============= Camera =============

@dataclass(frozen=True)
class CameraFrame:
    """Precomputed pinhole basis."""
    origin: Vec3
    forward: Vec3
    right: Vec3
    up: Vec3
    half_w: float
    half_h: float
    width: int
    height: int

    @classmethod
    def from_camera(cls, camera: CameraConfig) -> "CameraFrame":
        forward = _normalize(tuple(b - a for a, b in zip(camera.position, camera.look_at)))
        right = _normalize(_cross(forward, camera.up))
        up = _cross(right, forward)
        half_h = math.tan(math.radians(camera.vfov_deg) / 2.0)
        return cls(tuple(camera.position), forward, right, up,
                   half_h * camera.width / camera.height, half_h, camera.width, camera.height)

    def ray(self, px: float, py: float, jx: float = 0.5, jy: float = 0.5) -> Ray:
        sx = (2.0 * (px + jx) / self.width - 1.0) * self.half_w
        sy = (1.0 - 2.0 * (py + jy) / self.height) * self.half_h
        d = tuple(f + sx * r + sy * u for f, r, u in zip(self.forward, self.right, self.up))
        return Ray.toward(self.origin, d)


def camera_ray(camera: CameraConfig, px: float, py: float, jx: float = 0.5, jy: float = 0.5) -> Ray:
    return CameraFrame.from_camera(camera).ray(px, py, jx, jy)


# ============= Interface physics =============

def _segment_transmittance(attrs: VoxelAttributes, distance: float, voxel_size: float) -> np.ndarray:
    if attrs is AIR or distance <= 0.0:
        return ONE.copy()
    return np.array([attenuation_transmittance(p_a, distance, voxel_size) for p_a in attrs.attenuation])


def interface_reflectance(from_attrs: VoxelAttributes, to_attrs: VoxelAttributes, cos1: float,
                          mapping: MappingConfig = DEFAULT_MAPPING) -> np.ndarray:
    """Per-channel unpolarized power reflectance; P_t = 1 is a perfect mirror."""
    theta1 = math.acos(min(1.0, max(0.0, cos1)))
    out = np.empty(3)
    for c, (pt1, pt2) in enumerate(zip(from_attrs.transmissivity, to_attrs.transmissivity)):
        if pt2 == 1.0:
            out[c] = 1.0
            continue
        coeffs = interface(theta1, channel_optics(pt1, mapping), channel_optics(pt2, mapping))
        out[c] = reflectance_unpolarized(coeffs)
    return out


def smooth_normal(grid: VoxelGrid, event: InterfaceEvent, incoming: Sequence[float]) -> Vec3:
    """Gradient of mean transmissivity over the 3x3x3 neighborhood, facing the ray."""
    cell = event.to_cell if event.to_cell is not None and event.to_attrs != AIR else event.from_cell
    if cell is None:
        return event.normal
    gx = gy = gz = 0.0
    for dx, dy, dz in itertools.product((-1, 0, 1), repeat=3):
        if dx == dy == dz == 0:
            continue
        w = sum(grid.lookup(cell[0] + dx, cell[1] + dy, cell[2] + dz).transmissivity) / 3.0
        gx += dx * w
        gy += dy * w
        gz += dz * w
    length = math.sqrt(gx * gx + gy * gy + gz * gz)
    if length == 0.0:
        return event.normal
    n = (-gx / length, -gy / length, -gz / length)
    if _dot(n, incoming) > 0.0:
        n = (-n[0], -n[1], -n[2])
    if _dot(n, incoming) == 0.0:
        return event.normal
    return n


def _medium_at(grid: VoxelGrid, point: Sequence[float]) -> VoxelAttributes:
    s = grid.voxel_size
    return grid.lookup(int(math.floor(point[0] / s)), int(math.floor(point[1] / s)),
                       int(math.floor(point[2] / s)))


def shadow_transmittance(scene: Scene, origin: Sequence[float], direction: Sequence[float],
                         distance: float = math.inf) -> np.ndarray:
    """Per-channel fraction of light surviving a straight path.

    Interfaces remove their Fresnel reflectance, voxels their attenuation.
    """
    grid = scene.grid
    s = grid.voxel_size
    ray = Ray.toward(origin, direction, 0.0, distance)
    throughput = ONE.copy()
    medium = _medium_at(grid, ray.origin)
    t_medium = 0.0
    t_query = 0.0
    for _ in range(3 * sum(grid.dims) + 8):
        ev = next_interface(ray, grid, t_query)
        if ev is None:
            break
        throughput *= _segment_transmittance(ev.from_attrs, ev.t - t_medium, s)
        throughput *= 1.0 - interface_reflectance(ev.from_attrs, ev.to_attrs,
                                                  -_dot(ev.normal, ray.dir), scene.mapping)
        if not throughput.any():
            return throughput
        medium = ev.to_attrs
        t_medium = ev.t
        t_query = ev.t + SURFACE_EPS * s
        if t_query >= distance:
            break
    if math.isfinite(distance):
        throughput *= _segment_transmittance(medium, distance - t_medium, s)
    return throughput


def direct_light(scene: Scene, point: Sequence[float], normal: Sequence[float],
                 attrs: VoxelAttributes) -> np.ndarray:
    """Lambertian share of every light arriving at ``point``.

    Contribution per light is intensity x cos x P_t x D times the shadow
    transmittance (inverse-square falloff for point lights). Ambient lights
    ignore the normal and are never shadowed.
    """
    albedo = np.array(attrs.transmissivity) * attrs.d
    if not albedo.any():
        return ZERO.copy()
    eps = SURFACE_EPS * scene.grid.voxel_size
    total = np.zeros(3)
    for light in scene.lights:
        rgb = np.asarray(light.rgb, dtype=np.float64)
        if light.kind == LightKind.AMBIENT:
            total += rgb
            continue
        if light.kind == LightKind.POINT:
            to_light = tuple(lp - p for lp, p in zip(light.position, point))
            dist = math.sqrt(_dot(to_light, to_light))
            if dist <= eps:
                continue
            l_dir = (to_light[0] / dist, to_light[1] / dist, to_light[2] / dist)
            falloff = 1.0 / (dist * dist)
        else:
            l_dir = (-light.direction[0], -light.direction[1], -light.direction[2])
            dist = math.inf
            falloff = 1.0
        cos = _dot(normal, l_dir)
        if cos <= 0.0:
            continue
        transmit = shadow_transmittance(scene, _offset(point, normal, eps), l_dir, dist)
        total += rgb * cos * falloff * transmit
    return total * albedo


# ============= Path tracing =============

def _is_opaque_diffuse(attrs: VoxelAttributes, channel: Optional[int]) -> bool:
    if attrs.d != 1.0:
        return False
    if channel is None:
        return all(p_a == 1.0 for p_a in attrs.attenuation)
    return attrs.attenuation[channel] == 1.0


def _active(weights: np.ndarray, channel: Optional[int]) -> bool:
    return bool(weights[channel] > 0.0) if channel is not None else bool(weights.any())


def _permittivity(attrs: VoxelAttributes, mapping: MappingConfig, channel: Optional[int]) -> float:
    if channel is None:
        return geometric_permittivity(attrs, mapping)
    return channel_optics(attrs.transmissivity[channel], mapping).eps_r


def _trace(scene: Scene, ray: Ray, depth: int, rng: np.random.Generator,
           channel: Optional[int]) -> np.ndarray:
    if depth >= scene.params.max_depth:
        return ZERO.copy()
    grid = scene.grid
    ev = next_interface(ray, grid)
    if ev is None:
        return np.array(scene.background)

    s = grid.voxel_size
    eps = SURFACE_EPS * s
    throughput = _segment_transmittance(ev.from_attrs, ev.t - ray.t_min, s)
    if not _active(throughput, channel):
        return ZERO.copy()

    incoming = ray.dir
    n_i = (-incoming[0], -incoming[1], -incoming[2])
    normal = smooth_normal(grid, ev, incoming) if scene.params.smooth_normals else ev.normal
    cos1 = _dot(n_i, normal)
    reflected = tuple(reflect_dir(n_i, normal).tolist())
    to = ev.to_attrs

    if _is_opaque_diffuse(to, channel):
        child = _child_rng(rng, 0)
        radiance = direct_light(scene, ev.position, normal, to)
        bounce_dir = sample_scatter(incoming, normal, reflected, scatter_lobe(1.0), child)
        albedo = np.array(to.transmissivity)
        if _active(albedo, channel):
            bounce = _trace(scene, Ray(_offset(ev.position, normal, eps), bounce_dir), depth + 1, child, channel)
            radiance = radiance + albedo * bounce
        return throughput * radiance

    rng_r = _child_rng(rng, 1)
    rng_t = _child_rng(rng, 2)
    u = rng.random()

    lobe = scatter_lobe(max(ev.from_attrs.d, to.d))
    w_r = interface_reflectance(ev.from_attrs, to, cos1, scene.mapping)
    ratio = math.sqrt(_permittivity(ev.from_attrs, scene.mapping, channel)
                      / _permittivity(to, scene.mapping, channel))
    refracted = refract_dir(n_i, normal, ratio)
    if refracted is None:
        w_r = ONE.copy()
    w_t = 1.0 - w_r

    radiance = direct_light(scene, ev.position, normal, to)

    def reflect_branch() -> np.ndarray:
        d = sample_scatter(incoming, normal, reflected, lobe, rng_r)
        return _trace(scene, Ray(_offset(ev.position, normal, eps), d), depth + 1, rng_r, channel)

    def refract_branch() -> np.ndarray:
        d = sample_scatter(incoming, normal, tuple(refracted.tolist()), lobe, rng_t)
        return _trace(scene, Ray(_offset(ev.position, normal, -eps), d), depth + 1, rng_t, channel)

    if depth < SPLIT_DEPTH:
        if _active(w_r, channel):
            radiance = radiance + w_r * reflect_branch()
        if _active(w_t, channel):
            radiance = radiance + w_t * refract_branch()
    else:
        p = float(w_r[channel]) if channel is not None else float(w_r.mean())
        if u < p:
            radiance = radiance + (w_r / p) * reflect_branch()
        elif p < 1.0:
            radiance = radiance + (w_t / (1.0 - p)) * refract_branch()
    return throughput * radiance


def trace(scene: Scene, ray: Ray, depth: int = 0, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Linear RGB radiance arriving along ``-ray.dir``.

    With ``spectral_split`` each channel follows its own monochromatic path
    (per-channel refraction geometry), otherwise one geometric path uses the
    luminance-weighted permittivity.

    Past the split depth the surviving branch is reweighted by its selection
    probability. In spectral mode that keeps every throughput factor in
    [0, 1]. The luminance-weighted mode selects with the channel mean, so a
    single channel of the reweighted factor may exceed 1 while the expected
    radiance stays unbiased.
    """
    if rng is None:
        rng = make_rng(scene.params.seed, 0, 0)
    if not scene.params.spectral_split:
        return _trace(scene, ray, depth, rng, None)
    out = np.zeros(3)
    for c in range(3):
        out[c] = _trace(scene, ray, depth, _child_rng(rng, c), c)[c]
    return out


# ============= Rendering =============

def render_rows(scene: Scene, y0: int, y1: int) -> np.ndarray:
    """HDR rows [y0, y1) of the image."""
    frame = CameraFrame.from_camera(scene.camera)
    width = scene.camera.width
    spp = scene.params.spp
    seed = scene.params.seed
    rows = np.zeros((y1 - y0, width, 3))
    for y in range(y0, y1):
        for x in range(width):
            pixel_index = y * width + x
            acc = np.zeros(3)
            for sample_index in range(spp):
                rng = make_rng(seed, pixel_index, sample_index)
                jx, jy = rng.random(), rng.random()
                acc += trace(scene, frame.ray(x, y, jx, jy), 0, rng)
            rows[y - y0, x] = acc / spp
    return rows


_worker_scene: Optional[Scene] = None


def _init_worker(scene: Scene) -> None:
    global _worker_scene
    _worker_scene = scene


def _render_tile(bounds: Tuple[int, int]) -> np.ndarray:
    return render_rows(_worker_scene, bounds[0], bounds[1])


def render(scene: Scene, workers: int = 1) -> Framebuffer:
    """Average ``spp`` jittered samples per pixel.

    Tiles of rows are distributed over ``workers`` processes; the output is
    bit-identical for any worker count.
    """
    width, height = scene.camera.width, scene.camera.height
    tiles: List[Tuple[int, int]] = [(y, min(y + TILE_ROWS, height)) for y in range(0, height, TILE_ROWS)]
    logger.debug("rendering %d tile(s) of %d rows with %d worker(s)", len(tiles), TILE_ROWS, max(1, workers))
    if workers <= 1 or len(tiles) == 1:
        hdr = render_rows(scene, 0, height)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(scene,)) as pool:
            hdr = np.concatenate(list(pool.map(_render_tile, tiles)), axis=0)
    return Framebuffer(width=width, height=height, hdr=hdr)


def tone_map(fb: Framebuffer, display_gamma: float = 2.2) -> np.ndarray:
    """Clamp to [0, 1], gamma-encode and quantize (round half up) to uint8."""
    if not (display_gamma > 0.0 and math.isfinite(display_gamma)):
        raise OutOfRange("display_gamma", display_gamma)
    if not np.all(np.isfinite(fb.hdr)) or np.any(fb.hdr < 0.0):
        raise ValueError("framebuffer holds negative or non-finite values")
    encoded = np.clip(fb.hdr, 0.0, 1.0) ** (1.0 / display_gamma)
    return np.floor(encoded * 255.0 + 0.5).astype(np.uint8)
