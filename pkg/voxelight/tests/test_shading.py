"""Tests for sampling, lighting, path tracing and rendering."""
import math
from dataclasses import replace

import numpy as np
import pytest

from voxelight.errors import OutOfRange
from voxelight.models import AIR, VoxelAttributes, VoxelGrid, material_preset
from voxelight.optics import channel_optics, interface, reflect_dir, reflectance_unpolarized, scatter_lobe
from voxelight.schemas import CameraConfig, LightConfig, RenderParams
from voxelight.services.cloud_service import CloudService
from voxelight.services.scenegen_service import ScenegenService
from voxelight.shading import (
    Framebuffer,
    Scene,
    camera_ray,
    direct_light,
    interface_reflectance,
    make_rng,
    render,
    render_rows,
    sample_scatter,
    shadow_transmittance,
    tone_map,
    trace,
)
from voxelight.tests.helpers import make_scene, point_light
from voxelight.traversal import Ray, next_interface

# Glass transmissivity with full attenuation: nothing comes back out of the slab.
BLACK_GLASS = VoxelAttributes(0.2, 0.2, 0.2, 1.0, 1.0, 1.0, 0.0)


def _normal_reflectance(p_t: float) -> float:
    eta2 = 1e8 ** (-p_t / 2.0)
    return ((eta2 - 1.0) / (eta2 + 1.0)) ** 2


def _slab(dims, attrs, y_lo, y_hi) -> VoxelGrid:
    grid = VoxelGrid(dims)
    for x in range(dims[0]):
        for z in range(dims[2]):
            for y in range(y_lo, y_hi):
                grid.set((x, y, z), attrs)
    return grid


def _floor(attrs, dims=(4, 4, 4)) -> VoxelGrid:
    grid = VoxelGrid(dims)
    for x in range(dims[0]):
        for y in range(dims[1]):
            grid.set((x, y, 0), attrs)
    return grid


# ============= Random streams and sampling =============

def test_make_rng_is_keyed():
    """Test that streams depend only on (seed, pixel, sample)."""
    a = make_rng(5, 10, 3).random(4)
    b = make_rng(5, 10, 3).random(4)
    c = make_rng(5, 11, 3).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_specular_scatter_is_exact():
    base = (0.0, -0.6, 0.8)
    out = sample_scatter((0.0, 0.6, -0.8), (0.0, 0.0, 1.0), base, scatter_lobe(0.0), make_rng(0, 0, 0))
    assert out is base


def test_lambertian_scatter_statistics():
    """Test mean cosine 2/3 and uniform azimuth of d = 1 samples."""
    rng = make_rng(1, 2, 3)
    normal = (0.0, 0.0, 1.0)
    lobe = scatter_lobe(1.0)
    n = 100000
    dirs = np.array([sample_scatter((0.0, 0.6, -0.8), normal, (0.0, 0.6, 0.8), lobe, rng) for _ in range(n)])
    assert np.all(dirs[:, 2] >= 0.0)
    assert abs(dirs[:, 2].mean() - 2.0 / 3.0) < 0.01
    azimuth = np.arctan2(dirs[:, 1], dirs[:, 0])
    counts, _ = np.histogram(azimuth, bins=36, range=(-math.pi, math.pi))
    expected = n / 36
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # 99.9th percentile of chi-square with 35 degrees of freedom
    assert chi2 < 66.62


def test_glossy_scatter_stays_on_side():
    rng = make_rng(2, 0, 0)
    lobe = scatter_lobe(0.5)
    normal = (0.0, 0.0, 1.0)
    base = (math.sin(1.4), 0.0, math.cos(1.4))
    for _ in range(2000):
        d = sample_scatter((-base[0], 0.0, -base[2]), normal, base, lobe, rng)
        assert d[2] > 0.0
        assert abs(math.sqrt(sum(c * c for c in d)) - 1.0) < 1e-12


# ============= Camera =============

def test_camera_center_ray_looks_forward():
    scene = make_scene(VoxelGrid((4, 4, 4)), width=3, height=3)
    ray = camera_ray(scene.camera, 1, 1)
    forward = np.subtract(scene.camera.look_at, scene.camera.position)
    np.testing.assert_allclose(ray.dir, forward / np.linalg.norm(forward), atol=1e-12)
    top = camera_ray(scene.camera, 1, 0)
    assert top.dir[2] > 0.0


# ============= Lighting =============

@pytest.mark.parametrize("k", [1, 2, 4, 8])
def test_attenuation_through_glass(k):
    """Test (1 - R)^2 (1 - P_a)^k through k glass voxels at normal incidence."""
    grid = _slab((4, 12, 4), material_preset("glass"), 2, 2 + k)
    scene = make_scene(grid)
    transmit = shadow_transmittance(scene, (2.0, 0.5, 2.0), (0.0, 1.0, 0.0))
    r = _normal_reflectance(0.2)
    np.testing.assert_allclose(transmit, (1.0 - r) ** 2 * 0.8 ** k, rtol=1e-9)


def test_shadow_transmittance_blocked_by_mirror():
    grid = VoxelGrid((4, 4, 4))
    grid.set((2, 2, 2), material_preset("mirror"))
    scene = make_scene(grid)
    np.testing.assert_array_equal(shadow_transmittance(scene, (2.5, 2.5, 0.5), (0.0, 0.0, 1.0)), 0.0)


def test_direct_light_directional_and_ambient():
    """Test intensity x cos x P_t x D for a directional light plus an ambient term."""
    scene = make_scene(_floor(material_preset("white_shirt")),
                       lights=[LightConfig(kind="directional", direction=(0.6, 0.0, -0.8)),
                               LightConfig(kind="ambient", rgb=(0.1, 0.1, 0.1))])
    radiance = direct_light(scene, (2.0, 2.0, 1.0), (0.0, 0.0, 1.0), material_preset("white_shirt"))
    np.testing.assert_allclose(radiance, 0.8 * 0.8 + 0.1 * 0.8)


def test_direct_light_point_falloff_and_shadow():
    grid = _floor(material_preset("white_shirt"))
    scene = make_scene(grid, lights=[point_light((2.0, 2.0, 3.0), 4.0)])
    lit = direct_light(scene, (2.0, 2.0, 1.0), (0.0, 0.0, 1.0), material_preset("white_shirt"))
    np.testing.assert_allclose(lit, 0.8, rtol=1e-5)

    grid.set((2, 2, 2), material_preset("mirror"))
    shadowed = direct_light(scene, (2.0, 2.0, 1.0), (0.0, 0.0, 1.0), material_preset("white_shirt"))
    np.testing.assert_array_equal(shadowed, 0.0)


def test_mirror_reflectance_is_total():
    np.testing.assert_array_equal(interface_reflectance(AIR, material_preset("mirror"), 0.3), 1.0)


# ============= Path tracing =============

def test_single_interface_reflectance():
    """Test that a normal-incidence ray off a glass face returns R times the background."""
    grid = _slab((4, 4, 4), BLACK_GLASS, 1, 2)
    scene = make_scene(grid, background=(1.0, 1.0, 1.0))
    radiance = trace(scene, Ray((2.0, -5.0, 2.0), (0.0, 1.0, 0.0)))
    np.testing.assert_allclose(radiance, _normal_reflectance(0.2), rtol=1e-12)


def test_single_interface_render():
    grid = _slab((4, 4, 4), BLACK_GLASS, 1, 2)
    scene = make_scene(grid, background=(1.0, 1.0, 1.0), width=2, height=2, spp=4)
    scene = type(scene)(grid=grid, camera=scene.camera.model_copy(update={"vfov_deg": 1.0}),
                        background=(1.0, 1.0, 1.0), params=scene.params)
    fb = render(scene)
    np.testing.assert_allclose(fb.hdr, _normal_reflectance(0.2), rtol=5e-3)


def test_max_depth_cuts_paths():
    grid = _slab((4, 4, 4), BLACK_GLASS, 1, 2)
    scene = make_scene(grid, background=(1.0, 1.0, 1.0), max_depth=1)
    np.testing.assert_array_equal(trace(scene, Ray((2.0, -5.0, 2.0), (0.0, 1.0, 0.0))), 0.0)


def test_mirror_returns_background():
    grid = _slab((4, 4, 4), material_preset("mirror"), 1, 2)
    scene = make_scene(grid, background=(0.3, 0.5, 0.7))
    radiance = trace(scene, Ray((2.0, -5.0, 2.0), (0.0, 1.0, 0.0)))
    np.testing.assert_allclose(radiance, (0.3, 0.5, 0.7))


def test_red_shirt_only_returns_red():
    """Test that an opaque diffuse red surface under white light stays red."""
    scene = make_scene(_floor(material_preset("red_shirt")),
                       lights=[LightConfig(kind="directional", direction=(0.0, 0.0, -1.0))],
                       background=(1.0, 1.0, 1.0))
    radiance = trace(scene, Ray((2.5, 2.5, 3.5), (0.0, 0.0, -1.0)), rng=make_rng(0, 0, 0))
    np.testing.assert_allclose(radiance, (1.6, 0.0, 0.0))


def test_spectral_split_per_channel_reflectance():
    """Test that each channel sees its own permittivity contrast."""
    black_water = VoxelAttributes(0.2, 0.2, 0.5, 1.0, 1.0, 1.0, 0.0)
    grid = _slab((4, 4, 4), black_water, 1, 2)
    scene = make_scene(grid, background=(1.0, 1.0, 1.0), spectral_split=True)
    radiance = trace(scene, Ray((2.0, -5.0, 2.0), (0.0, 1.0, 0.0)))
    expected = [reflectance_unpolarized(interface(0.0, channel_optics(0.0), channel_optics(p)))
                for p in (0.2, 0.2, 0.5)]
    np.testing.assert_allclose(radiance, expected, rtol=1e-12)


# ============= Rendering =============

def _diffuse_scene(**render):
    grid = _floor(material_preset("red_shirt"))
    for x in (1, 2):
        for y in (1, 2):
            for z in (1, 2, 3):
                grid.set((x, y, z), material_preset("frosted_glass"))
    return make_scene(grid, lights=[point_light((2.0, -2.0, 6.0), 40.0)],
                      background=(0.2, 0.2, 0.3), **render)


def test_render_is_deterministic():
    scene = _diffuse_scene(width=4, height=4, spp=2, seed=9)
    assert render(scene).digest() == render(scene).digest()
    other = _diffuse_scene(width=4, height=4, spp=2, seed=10)
    assert render(other).digest() != render(scene).digest()


def test_render_independent_of_worker_count():
    """Test bit-identical output for one and several worker processes."""
    scene = _diffuse_scene(width=4, height=12, spp=2, seed=3)
    single = render(scene, workers=1)
    pooled = render(scene, workers=2)
    np.testing.assert_array_equal(single.hdr, pooled.hdr)
    np.testing.assert_array_equal(render_rows(scene, 8, 12), single.hdr[8:12])


def test_empty_grid_shows_background():
    scene = make_scene(VoxelGrid((4, 4, 4)), background=(0.25, 0.5, 1.0), spp=2)
    fb = render(scene)
    np.testing.assert_array_equal(fb.hdr, np.broadcast_to([0.25, 0.5, 1.0], (4, 4, 3)))


def _demo_scene(name: str, width: int, height: int, **render) -> Scene:
    demo = ScenegenService.demo_scene(name)
    cfg = demo.variants["default"]
    camera = cfg.camera.model_copy(update={"width": width, "height": height})
    return Scene(grid=demo.grid, camera=camera, lights=tuple(cfg.lights), background=cfg.background,
                 params=RenderParams(**render))


def test_air_voxels_are_invisible():
    """Test that a demo cloud with explicit air records renders identically."""
    scene = _demo_scene("glass_sphere", 6, 6, spp=1, max_depth=3)
    text = CloudService.serialize_cloud(scene.grid, encoding="ascii").decode("ascii")
    count = len(scene.grid)
    air_rows = []
    for i in range(10000):
        coord = (i % 32, (i // 32) % 32, 20 + i // 1024)
        assert scene.grid.get(coord) == AIR
        air_rows.append(f"{coord[0]} {coord[1]} {coord[2]} 0 0 0 0 0 0 0\n")
    text = text.replace(f"element vertex {count}\n", f"element vertex {count + 10000}\n") + "".join(air_rows)
    grid = CloudService.parse_cloud(text.encode("ascii"))
    assert grid == scene.grid
    with_air = Scene(grid=grid, camera=scene.camera, lights=scene.lights,
                     background=scene.background, params=scene.params)
    assert render(with_air).digest() == render(scene).digest()


def test_framebuffer_rejects_invalid_values():
    with pytest.raises(ValueError):
        Framebuffer(1, 1, np.array([[[-1.0, 0.0, 0.0]]]))
    with pytest.raises(ValueError):
        Framebuffer(2, 1, np.zeros((1, 1, 3)))


def test_tone_map():
    """Test clamp, gamma 2.2 encoding and round-half-up quantization."""
    fb = Framebuffer(4, 1, np.array([[[0.0] * 3, [1.0] * 3, [0.5] * 3, [7.0] * 3]]))
    pixels = tone_map(fb)
    assert pixels.dtype == np.uint8
    assert pixels[0, :, 0].tolist() == [0, 255, 186, 255]


@pytest.mark.parametrize("gamma", [0.0, -1.0, math.nan])
def test_tone_map_rejects_non_positive_gamma(gamma):
    fb = Framebuffer(1, 1, np.array([[[0.5, 0.5, 0.5]]]))
    with pytest.raises(OutOfRange):
        tone_map(fb, display_gamma=gamma)


# ============= Physical consistency =============

def _floor_view(camera_at, light_at) -> Scene:
    camera = CameraConfig(position=camera_at, look_at=(4.5, 4.5, 1.0), vfov_deg=1.0, width=2, height=2)
    return Scene(grid=_floor(material_preset("white_shirt"), dims=(8, 8, 4)), camera=camera,
                 lights=(point_light(light_at, 25.0),), params=RenderParams(spp=4, max_depth=4))


def test_swapping_camera_and_light_keeps_luminance():
    """Test reciprocity of one diffuse bounce between a point light and the camera."""
    a, b = (7.5, 4.5, 5.0), (4.5, 7.5, 5.0)
    forward = render(_floor_view(a, b)).hdr.mean()
    swapped = render(_floor_view(b, a)).hdr.mean()
    # 25 * cos / dist^2 * albedo with cos = 0.8, dist = 5, albedo = 0.8
    assert forward == pytest.approx(0.64, rel=0.05)
    assert swapped == pytest.approx(forward, rel=0.05)


def test_spectral_channels_are_separable():
    """Test that changing red transmissivity alone leaves green and blue untouched."""
    scene = _demo_scene("glass_sphere", 6, 6, spp=1, max_depth=3, spectral_split=True)
    redder = scene.grid.copy()
    for coord, attrs in scene.grid.cells():
        redder.set(coord, replace(attrs, r_t=0.5 * attrs.r_t + 0.25))
    shifted = Scene(grid=redder, camera=scene.camera, lights=scene.lights,
                    background=scene.background, params=scene.params)
    base = render(scene).hdr
    other = render(shifted).hdr
    np.testing.assert_array_equal(base[..., 1:], other[..., 1:])
    assert not np.array_equal(base[..., 0], other[..., 0])


def test_unlit_scene_never_exceeds_background():
    """Test that no interface or medium amplifies light along a path."""
    background = (0.6, 0.7, 0.8)
    demo = _demo_scene("materials_gallery", 16, 8, spp=1, max_depth=5, spectral_split=True)
    scene = Scene(grid=demo.grid, camera=demo.camera, background=background, params=demo.params)
    hdr = render(scene).hdr
    assert (hdr <= np.array(background) + 1e-9).all()
    assert hdr.max() > 0.0


PIXEL_CORNERS = ((0.5, 0.5), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))


def _mirrored_tile(scene: Scene, ray: Ray):
    """(tile index, attributes) of the floor seen through a mirror face, or None."""
    ev = next_interface(ray, scene.grid)
    if ev is None or ev.to_attrs != material_preset("mirror"):
        return None
    reflected = reflect_dir(tuple(-c for c in ray.dir), ev.normal)
    origin = tuple(p + 1e-6 * n for p, n in zip(ev.position, ev.normal))
    hit = next_interface(Ray.toward(origin, tuple(reflected.tolist())), scene.grid)
    if hit is None or hit.to_cell is None or hit.to_cell[2] != 0:
        return None
    return (hit.to_cell[0] // 2, hit.to_cell[1] // 2), hit.to_attrs


def test_materials_gallery_render():
    """Test the red shirt stays red and the mirror slab reflects the checker floor.

    Only pixels whose corners agree are checked, so every jittered sample
    lands on the same surface or tile as the pixel center.
    """
    scene = _demo_scene("materials_gallery", 96, 48, spp=1, max_depth=3)
    camera = scene.camera
    red = material_preset("red_shirt")
    red_pixels = []
    tiles = {}
    for py in range(camera.height):
        for px in range(camera.width):
            hit = next_interface(camera_ray(camera, px, py), scene.grid)
            if hit is None:
                continue
            if hit.to_attrs == red:
                corners = [next_interface(camera_ray(camera, px, py, jx, jy), scene.grid)
                           for jx, jy in PIXEL_CORNERS]
                if all(c is not None and c.to_attrs == red for c in corners):
                    red_pixels.append((px, py))
            elif hit.to_attrs == material_preset("mirror"):
                seen = {_mirrored_tile(scene, camera_ray(camera, px, py, jx, jy)) for jx, jy in PIXEL_CORNERS}
                if len(seen) == 1 and None not in seen:
                    tiles[(px, py)] = seen.pop()[1]
    assert red_pixels
    assert tiles

    rows = {py: render_rows(scene, py, py + 1)[0] for py in {py for _, py in red_pixels + list(tiles)}}
    red_mean = np.mean([rows[py][px] for px, py in red_pixels], axis=0)
    assert red_mean[0] > 4.0 * red_mean[1]
    assert red_mean[0] > 4.0 * red_mean[2]

    white = [rows[py][px].mean() for (px, py), attrs in tiles.items() if attrs == material_preset("white_shirt")]
    dark = [rows[py][px].mean() for (px, py), attrs in tiles.items() if attrs == material_preset("dark_shirt")]
    assert white
    assert dark
    assert np.mean(white) > 2.0 * np.mean(dark)
