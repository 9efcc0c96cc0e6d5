"""Pydantic schemas for scene configuration, cloud headers and API responses."""
import math
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from voxelight.models import ATTRIBUTE_NAMES, Encoding, LightKind, Quantization

Vec3 = Tuple[float, float, float]
RGB = Tuple[float, float, float]

MAX_SEED = 2 ** 64 - 1


def _norm(v: Vec3) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def _unit(v: Vec3, what: str) -> Vec3:
    """Normalize unless already unit to within 1e-12, so round-trips stay stable."""
    n = _norm(v)
    if not math.isfinite(n) or n == 0.0:
        raise ValueError(f"{what} must be a non-zero finite vector")
    if abs(n - 1.0) <= 1e-12:
        return tuple(float(c) for c in v)
    return (v[0] / n, v[1] / n, v[2] / n)


def _check_rgb(v: RGB) -> RGB:
    if any(not math.isfinite(c) or c < 0.0 for c in v):
        raise ValueError("rgb components must be finite and >= 0")
    return v


# ============= Optics Schemas =============

class MappingConfig(BaseModel):
    """Transmissivity to permittivity mapping: eps_r = eps_max ** (p_t ** gamma_map)."""
    eps_max: float = Field(1e8, gt=1.0)
    gamma_map: float = Field(1.0, gt=0.0)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("eps_max", "gamma_map")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v


# ============= Scene Schemas =============

class CameraConfig(BaseModel):
    """Pinhole camera."""
    position: Vec3
    look_at: Vec3
    up: Vec3 = (0.0, 0.0, 1.0)
    vfov_deg: float = Field(45.0, gt=0.0, lt=180.0)
    width: int = Field(64, gt=0)
    height: int = Field(64, gt=0)

    model_config = ConfigDict(extra="forbid")

    @field_validator("up")
    @classmethod
    def validate_up(cls, v: Vec3) -> Vec3:
        return _unit(v, "up")

    @model_validator(mode="after")
    def validate_orientation(self) -> "CameraConfig":
        forward = tuple(b - a for a, b in zip(self.position, self.look_at))
        if _norm(forward) == 0.0:
            raise ValueError("look_at must differ from position")
        f = _unit(forward, "view direction")
        u = self.up
        cross = (f[1] * u[2] - f[2] * u[1], f[2] * u[0] - f[0] * u[2], f[0] * u[1] - f[1] * u[0])
        if _norm(cross) < 1e-9:
            raise ValueError("up must not be parallel to the view direction")
        return self


class LightConfig(BaseModel):
    """Point, directional or ambient light. Lights never live in the cloud file."""
    kind: LightKind
    position: Optional[Vec3] = None
    direction: Optional[Vec3] = None
    rgb: RGB = (1.0, 1.0, 1.0)

    model_config = ConfigDict(extra="forbid")

    @field_validator("rgb")
    @classmethod
    def validate_rgb(cls, v: RGB) -> RGB:
        return _check_rgb(v)

    @model_validator(mode="after")
    def validate_geometry(self) -> "LightConfig":
        if self.kind == LightKind.POINT:
            if self.position is None or self.direction is not None:
                raise ValueError("point light needs a position and no direction")
        elif self.kind == LightKind.DIRECTIONAL:
            if self.direction is None or self.position is not None:
                raise ValueError("directional light needs a direction and no position")
            self.direction = _unit(self.direction, "direction")
        elif self.position is not None or self.direction is not None:
            raise ValueError("ambient light takes neither position nor direction")
        return self


class RenderParams(BaseModel):
    """Sampling parameters."""
    spp: int = Field(16, ge=1)
    max_depth: int = Field(8, ge=1)
    seed: int = Field(0, ge=0, le=MAX_SEED)
    spectral_split: bool = False
    smooth_normals: bool = False

    model_config = ConfigDict(extra="forbid")


class SceneConfig(BaseModel):
    """Scene file: everything the cloud deliberately does not contain."""
    camera: CameraConfig
    lights: List[LightConfig] = Field(default_factory=list)
    background: RGB = (0.0, 0.0, 0.0)
    render: RenderParams = Field(default_factory=RenderParams)
    optics: MappingConfig = Field(default_factory=MappingConfig)
    cloud: str = Field(..., min_length=1)

    model_config = ConfigDict(extra="forbid")

    @field_validator("background")
    @classmethod
    def validate_background(cls, v: RGB) -> RGB:
        return _check_rgb(v)


# ============= Cloud Schemas =============

class CloudHeader(BaseModel):
    """Parsed cloud header."""
    dims: Tuple[int, int, int]
    voxel_size: float = Field(..., gt=0.0)
    count: int = Field(..., ge=0)
    encoding: Encoding = Encoding.BINARY
    quantization: Quantization = Quantization.FLOAT32

    @field_validator("dims")
    @classmethod
    def validate_dims(cls, v: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(n <= 0 for n in v):
            raise ValueError("dims must be positive")
        return v


class AttributeStats(BaseModel):
    """Min/max/mean of one attribute over occupied voxels."""
    min: float
    max: float
    mean: float


class CloudInfo(BaseModel):
    """Summary printed by `info` and returned by the API."""
    dims: Tuple[int, int, int]
    voxel_size: float
    occupied: int
    attributes: Dict[str, AttributeStats]
    presets: Dict[str, int]
    unmatched: int

    @field_validator("attributes")
    @classmethod
    def validate_attribute_names(cls, v: Dict[str, AttributeStats]) -> Dict[str, AttributeStats]:
        unknown = set(v) - set(ATTRIBUTE_NAMES)
        if unknown:
            raise ValueError(f"unknown attributes {sorted(unknown)}")
        return v


class ValidationReport(BaseModel):
    """Every violation found in a cloud file."""
    valid: bool
    violations: List[str] = Field(default_factory=list)


# ============= API Schemas =============

class MaterialRead(BaseModel):
    """Schema for a material preset response."""
    name: str
    r_t: float
    g_t: float
    b_t: float
    r_a: float
    g_a: float
    b_a: float
    d: float


class DemoSceneRead(BaseModel):
    """Schema for a demo scene response."""
    name: str
    dims: Tuple[int, int, int]
    voxel_size: float
    occupied: int
    variants: Dict[str, SceneConfig]
