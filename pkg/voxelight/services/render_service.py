"""Render service: timed rendering and image encoding."""
import enum
import io
import logging
import time
from typing import Union

import numpy as np
import png

from voxelight.shading import Framebuffer, Scene, render, tone_map

logger = logging.getLogger(__name__)


class ImageFormat(str, enum.Enum):
    PPM = "ppm"
    PNG = "png"

    @classmethod
    def for_path(cls, path: str) -> "ImageFormat":
        return cls.PNG if str(path).lower().endswith(".png") else cls.PPM


def _check_pixels(pixels: np.ndarray) -> np.ndarray:
    if pixels.dtype != np.uint8 or pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected an H x W x 3 uint8 image, got {pixels.dtype} {pixels.shape}")
    return np.ascontiguousarray(pixels)


class RenderService:
    """Service for rendering and image output."""

    @staticmethod
    def render(scene: Scene, workers: int = 1) -> Framebuffer:
        """Render and log the wall-clock time."""
        start = time.perf_counter()
        fb = render(scene, workers=workers)
        elapsed = time.perf_counter() - start
        logger.info("rendered %dx%d at %d spp with %d worker(s) in %.2fs",
                    fb.width, fb.height, scene.params.spp, max(1, workers), elapsed)
        return fb

    @staticmethod
    def encode_ppm(pixels: np.ndarray) -> bytes:
        """Binary P6, maxval 255."""
        pixels = _check_pixels(pixels)
        height, width, _ = pixels.shape
        return f"P6\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()

    @staticmethod
    def encode_png(pixels: np.ndarray) -> bytes:
        """8-bit RGB PNG of the same pixels."""
        pixels = _check_pixels(pixels)
        height, width, _ = pixels.shape
        writer = png.Writer(width=width, height=height, greyscale=False, bitdepth=8)
        out = io.BytesIO()
        writer.write(out, pixels.reshape(height, width * 3).tolist())
        return out.getvalue()

    @staticmethod
    def encode(pixels: np.ndarray, fmt: Union[ImageFormat, str] = ImageFormat.PPM) -> bytes:
        if ImageFormat(fmt) == ImageFormat.PNG:
            return RenderService.encode_png(pixels)
        return RenderService.encode_ppm(pixels)

    @staticmethod
    def render_image(scene: Scene, fmt: Union[ImageFormat, str] = ImageFormat.PPM, workers: int = 1,
                     display_gamma: float = 2.2) -> bytes:
        """Render, tone map and encode in one step."""
        fb = RenderService.render(scene, workers=workers)
        return RenderService.encode(tone_map(fb, display_gamma), fmt)
