"""Interface optics for voxel attributes.

Attributes are interpreted as good dielectrics (mu_r = 1): transmissivity maps
to a relative permittivity, ``1/sqrt(eps_r)`` scales both speed and impedance,
Snell's law gives the refraction angle and the Fresnel field ratios give the
reflected and transmitted parts. All functions are pure.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from voxelight.errors import DegenerateNormal, OutOfRange
from voxelight.models import VoxelAttributes
from voxelight.schemas import MappingConfig

DEFAULT_MAPPING = MappingConfig()

# Largest Phong exponent + 1; d = 0 gives exponent 4096.
PHONG_N_MAX = 4097.0

# Rec. 709 luminance weights.
LUMINANCE = (0.2126, 0.7152, 0.0722)

NORMAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ChannelOptics:
    """Relative permittivity, impedance and speed of one color channel."""
    eps_r: float
    eta_rel: float
    v_rel: float


@dataclass(frozen=True)
class InterfaceCoefficients:
    """Fresnel field ratios at a planar interface."""
    theta1: float
    theta2: float
    tir: bool
    gamma_perp: float
    t_perp: float
    gamma_par: float
    t_par: float


@dataclass(frozen=True)
class ScatterLobe:
    """Scattering lobe derived from diffuseness."""
    d: float
    phong_exponent: float
    lambert_weight: float

    @property
    def is_delta(self) -> bool:
        return self.d == 0.0


def _unit_interval(name: str, value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise OutOfRange(name, value)
    return value


# ============= Permittivity mapping =============

def transmissivity_to_permittivity(p_t: float, cfg: MappingConfig = DEFAULT_MAPPING) -> float:
    """eps_r = eps_max ** (p_t ** g); 1 at p_t = 0, eps_max at p_t = 1."""
    _unit_interval("p_t", p_t)
    return cfg.eps_max ** (p_t ** cfg.gamma_map)


def permittivity_to_transmissivity(eps_r: float, cfg: MappingConfig = DEFAULT_MAPPING) -> float:
    """Inverse of transmissivity_to_permittivity."""
    if not (1.0 <= eps_r <= cfg.eps_max):
        raise OutOfRange("eps_r", eps_r)
    return (math.log(eps_r) / math.log(cfg.eps_max)) ** (1.0 / cfg.gamma_map)


@lru_cache(maxsize=4096)
def channel_optics(p_t: float, cfg: MappingConfig = DEFAULT_MAPPING) -> ChannelOptics:
    eps_r = transmissivity_to_permittivity(p_t, cfg)
    scale = 1.0 / math.sqrt(eps_r)
    return ChannelOptics(eps_r=eps_r, eta_rel=scale, v_rel=scale)


def voxel_optics(attrs: VoxelAttributes,
                 cfg: MappingConfig = DEFAULT_MAPPING) -> Tuple[ChannelOptics, ChannelOptics, ChannelOptics]:
    return tuple(channel_optics(p_t, cfg) for p_t in attrs.transmissivity)


def geometric_permittivity(attrs: VoxelAttributes, cfg: MappingConfig = DEFAULT_MAPPING) -> float:
    """Luminance-weighted permittivity used when a single refracted ray is traced."""
    return sum(w * channel_optics(p_t, cfg).eps_r for w, p_t in zip(LUMINANCE, attrs.transmissivity))


# ============= Directions =============

def _check_normal(n: np.ndarray) -> None:
    length = float(np.linalg.norm(n))
    if abs(length - 1.0) > NORMAL_TOLERANCE:
        raise DegenerateNormal(length)


def reflect_dir(n_i: Sequence[float], n: Sequence[float]) -> np.ndarray:
    """Mirror direction n_r = 2 (n_i . n) n - n_i; n_i points toward the source."""
    n_i = np.asarray(n_i, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    _check_normal(n)
    return 2.0 * float(np.dot(n_i, n)) * n - n_i


def snell(theta1: float, v1_rel: float, v2_rel: float) -> Optional[float]:
    """Refraction angle from sin(theta2) = (v2/v1) sin(theta1).

    Returns None on total internal reflection, i.e. when that sine exceeds 1.
    """
    s = (v2_rel / v1_rel) * math.sin(theta1)
    if s > 1.0:
        return None
    return math.asin(s)


def refract_dir(n_i: Sequence[float], n: Sequence[float], ratio: float) -> Optional[np.ndarray]:
    """Unit refraction direction into medium 2, or None on total internal reflection.

    ``ratio`` is sin(theta2)/sin(theta1) = v2/v1. The result lies in the plane
    of (n_i, n), on the far side of the interface.
    """
    n_i = np.asarray(n_i, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    _check_normal(n)
    cos1 = min(1.0, float(np.dot(n_i, n)))
    sin2 = ratio * math.sqrt(max(0.0, 1.0 - cos1 * cos1))
    if sin2 > 1.0:
        return None
    cos2 = math.sqrt(max(0.0, 1.0 - sin2 * sin2))
    n_t = ratio * (cos1 * n - n_i) - cos2 * n
    return n_t / np.linalg.norm(n_t)


# ============= Fresnel =============

def fresnel(theta1: float, theta2: float, eta1_rel: float, eta2_rel: float) -> InterfaceCoefficients:
    """Field reflection/transmission ratios for both polarizations."""
    c1 = math.cos(theta1)
    c2 = math.cos(theta2)
    den_perp = eta2_rel * c1 + eta1_rel * c2
    den_par = eta1_rel * c1 + eta2_rel * c2
    return InterfaceCoefficients(
        theta1=theta1,
        theta2=theta2,
        tir=False,
        gamma_perp=(eta2_rel * c1 - eta1_rel * c2) / den_perp,
        t_perp=2.0 * eta2_rel * c1 / den_perp,
        gamma_par=(eta1_rel * c1 - eta2_rel * c2) / den_par,
        t_par=2.0 * eta2_rel * c1 / den_par,
    )


def total_internal_reflection(theta1: float) -> InterfaceCoefficients:
    return InterfaceCoefficients(theta1=theta1, theta2=math.pi / 2, tir=True,
                                 gamma_perp=1.0, t_perp=0.0, gamma_par=1.0, t_par=0.0)


def interface(theta1: float, optics1: ChannelOptics, optics2: ChannelOptics) -> InterfaceCoefficients:
    """Snell then Fresnel for one channel crossing from medium 1 into medium 2."""
    theta2 = snell(theta1, optics1.v_rel, optics2.v_rel)
    if theta2 is None:
        return total_internal_reflection(theta1)
    return fresnel(theta1, theta2, optics1.eta_rel, optics2.eta_rel)


def reflectance_unpolarized(coeffs: InterfaceCoefficients) -> float:
    """Power reflectance averaged over both polarizations.

    Callers treat total internal reflection as R = 1; a TIR record yields 1.
    """
    if coeffs.tir:
        return 1.0
    return 0.5 * (coeffs.gamma_perp ** 2 + coeffs.gamma_par ** 2)


# ============= Attenuation and diffusion =============

def attenuation_transmittance(p_a: float, distance: float, voxel_size: float = 1.0) -> float:
    """Fraction surviving ``distance`` inside a voxel: (1 - p_a) ** (distance / voxel_size)."""
    _unit_interval("p_a", p_a)
    if distance < 0.0:
        raise OutOfRange("distance", distance)
    if voxel_size <= 0.0:
        raise OutOfRange("voxel_size", voxel_size)
    if p_a == 0.0:
        return 1.0
    return (1.0 - p_a) ** (distance / voxel_size)


def scatter_lobe(d: float) -> ScatterLobe:
    _unit_interval("d", d)
    return ScatterLobe(d=d, phong_exponent=PHONG_N_MAX ** (1.0 - d) - 1.0, lambert_weight=d)
