"""Cloud density field: layered base shape, coverage carving, vertical
profile, erosion, and pseudo-motion, combined into an extinction coefficient.

World space uses km with z up. A planar layer spans altitudes
[bottom_altitude_km, bottom_altitude_km + thickness_km]; a spherical shell
wraps a planet centered at (0, 0, -planet_radius_km) so the origin sits on
the surface. All operations are pure and vectorized over (N, 3) position
arrays; the ray marcher re-implements the same arithmetic in its compiled
kernel and is cross-checked against this module in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Tuple

import numpy as np

from ._common import lerp, remap, smoothstep
from .errors import ParameterError
from .volume import VolumeTexture, sample_trilinear, world_to_texture

__all__ = [
    "CloudLayer", "CloudParams", "DensitySample", "TextureSet",
    "remap", "normalized_height", "base_shape", "vertical_profile",
    "erode", "extinction_at", "coverage_fraction",
    "COVERAGE_EPS", "EXTINCTION_COVERAGE_THRESHOLD",
]

LAYER_GEOMETRIES = ("planar_slab", "spherical_shell")
FIELD_METHODS = ("composite_remap", "coverage_carve", "channel_lerp")

#: Coverage at or below this carves to exactly zero (empty sky).
COVERAGE_EPS = 1e-6
#: Occupancy threshold of coverage_fraction, as a fraction of sigma_max.
EXTINCTION_COVERAGE_THRESHOLD = 1e-6

#: Height-profile tables, sampled at 8 equidistant normalized heights.
#: Stratus concentrates mass low in the layer; cumulus spreads it to a
#: rounded top. Linearly interpolated between entries.
_PROFILE_HEIGHTS = np.linspace(0.0, 1.0, 8)
_STRATUS_TABLE = np.array([0.0, 1.0, 0.9, 0.25, 0.05, 0.0, 0.0, 0.0])
_CUMULUS_TABLE = np.array([0.0, 0.7, 0.9, 1.0, 1.0, 0.95, 0.7, 0.0])


@dataclass(frozen=True)
class CloudLayer:
    """Geometric extent of the cloud deck."""

    geometry: str = "planar_slab"
    bottom_altitude_km: float = 1.5
    thickness_km: float = 4.0
    planet_radius_km: float = 6360.0

    def __post_init__(self):
        if self.geometry not in LAYER_GEOMETRIES:
            raise ParameterError(f"unknown layer geometry {self.geometry!r}")
        if not self.thickness_km > 0.0:
            raise ParameterError(f"thickness_km must be > 0, got {self.thickness_km}")
        if self.geometry == "spherical_shell" and not self.planet_radius_km > 0.0:
            raise ParameterError(f"planet_radius_km must be > 0, got {self.planet_radius_km}")

    def altitude(self, pos: np.ndarray) -> np.ndarray:
        """Altitude above the reference surface for (..., 3) positions."""
        pos = np.asarray(pos, dtype=np.float64)
        if self.geometry == "planar_slab":
            return pos[..., 2]
        center_offset = pos + np.array([0.0, 0.0, self.planet_radius_km])
        return np.sqrt(np.sum(center_offset * center_offset, axis=-1)) - self.planet_radius_km


@dataclass(frozen=True)
class CloudParams:
    """Artist-facing knobs of the density field."""

    method: str = "channel_lerp"
    P3: float = 1.0
    P4: float = 0.85
    C_type: float = 0.5
    C_wispy: float = 0.248
    C_billowy: float = 0.016
    b_tiling_km: float = 30.0
    e_tiling_km: float = 3.8
    base_noise_frequency: float = 1.2
    erosion_noise_frequency: float = 1.5
    erosion_strength: float = 0.4
    wind_kmps: Tuple[float, float, float] = (0.008, 0.002, 0.0)
    erosion_motion_scale: float = 3.0
    sigma_max: float = 30.0

    def __post_init__(self):
        if self.method not in FIELD_METHODS:
            raise ParameterError(f"unknown coverage method {self.method!r}")
        if self.P3 < 0.0:
            raise ParameterError(f"P3 must be >= 0, got {self.P3}")
        if not 0.0 <= self.P4 <= 1.5:
            raise ParameterError(f"P4 must be in [0, 1.5], got {self.P4}")
        for name in ("C_type", "C_wispy", "C_billowy", "erosion_strength"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1], got {v}")
        for name in ("b_tiling_km", "e_tiling_km", "sigma_max",
                     "base_noise_frequency", "erosion_noise_frequency"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ParameterError(f"{name} must be > 0, got {v}")
        if self.erosion_motion_scale < 0.0:
            raise ParameterError(f"erosion_motion_scale must be >= 0, got {self.erosion_motion_scale}")
        if len(self.wind_kmps) != 3:
            raise ParameterError(f"wind_kmps must have 3 components, got {self.wind_kmps!r}")
        object.__setattr__(self, "wind_kmps", tuple(float(w) for w in self.wind_kmps))


@dataclass(frozen=True)
class TextureSet:
    """The two baked volumes consumed by the field."""

    base: VolumeTexture
    erosion: VolumeTexture


@dataclass
class DensitySample:
    """Extinction plus the pre-erosion shape for debug views."""

    extinction: np.ndarray
    base_shape: np.ndarray


def normalized_height(pos, layer: CloudLayer) -> np.ndarray:
    """Layer-relative height: 0 at the bottom boundary, 1 at the top."""
    alt = layer.altitude(pos)
    return (alt - layer.bottom_altitude_km) / layer.thickness_km


def _base_texture_coord(pos, t: float, params: CloudParams) -> np.ndarray:
    offset = np.asarray(params.wind_kmps) * t
    period = params.b_tiling_km / params.base_noise_frequency
    return world_to_texture(pos, period, offset)


def _erosion_texture_coord(pos, t: float, params: CloudParams) -> np.ndarray:
    offset = np.asarray(params.wind_kmps) * (t * params.erosion_motion_scale)
    period = params.e_tiling_km / params.erosion_noise_frequency
    return world_to_texture(pos, period, offset)


def _carve(b: np.ndarray, p3: float, p4: float) -> np.ndarray:
    """Coverage carve: scale the shape, then re-expand it over [1-P4, 1].

    P4 at or below COVERAGE_EPS returns exactly zero (empty sky) instead of
    remapping over a degenerate interval.
    """
    if p4 <= COVERAGE_EPS:
        return np.zeros_like(np.asarray(b, dtype=np.float64))
    scaled = np.asarray(b, dtype=np.float64) * min(p3, 1.0)
    return np.clip(remap(scaled, 1.0 - p4, 1.0, 0.0, 1.0), 0.0, 1.0)


def base_shape(pos, t: float, params: CloudParams, base_tex: VolumeTexture) -> np.ndarray:
    """Pre-profile cloud shape in [0, 1] from the 4-channel base texture.

    Three methods: composite_remap dilates R by a weighted detail FBM of
    G/B/A and then carves; coverage_carve carves the R channel directly;
    channel_lerp chains R through G/B/A under the three shape weights and
    carves the blend.
    """
    coord = _base_texture_coord(pos, t, params)
    tex = sample_trilinear(base_tex, coord)
    tex = np.atleast_2d(tex)
    r, g, b, a = (tex[:, k] for k in range(4))

    if params.method == "composite_remap":
        detail = 0.625 * g + 0.25 * b + 0.125 * a
        shaped = np.clip(remap(r, detail - 1.0, 1.0, 0.0, 1.0), 0.0, 1.0)
        out = _carve(shaped, params.P3, params.P4)
    elif params.method == "coverage_carve":
        out = _carve(r, params.P3, params.P4)
    else:
        m1 = lerp(r, g, params.C_type)
        m2 = lerp(m1, b, params.C_wispy)
        m3 = lerp(m2, a, params.C_billowy)
        if params.P4 <= COVERAGE_EPS:
            out = np.zeros_like(m3)
        else:
            out = np.clip(remap(m3 * params.P3, 1.0 - params.P4, 1.0, 0.0, 1.0), 0.0, 1.0)

    single = np.asarray(pos).ndim == 1
    return float(out[0]) if single else out


def vertical_profile(norm_height, c_type: float) -> np.ndarray:
    """Altitude-dependent density multiplier in [0, 1].

    Blends the stratus-like and cumulus-like height tables by C_type, then
    fades analytically to zero at the layer boundaries:
    smoothstep(0, 0.07, h) * (1 - smoothstep(0.85, 1, h)).
    """
    h = np.clip(np.asarray(norm_height, dtype=np.float64), 0.0, 1.0)
    stratus = np.interp(h, _PROFILE_HEIGHTS, _STRATUS_TABLE)
    cumulus = np.interp(h, _PROFILE_HEIGHTS, _CUMULUS_TABLE)
    shaped = lerp(stratus, cumulus, c_type)
    fade = smoothstep(0.0, 0.07, h) * (1.0 - smoothstep(0.85, 1.0, h))
    out = shaped * fade
    return float(out) if out.ndim == 0 else out


def erode(base, pos, t: float, params: CloudParams, erosion_tex: VolumeTexture) -> np.ndarray:
    """Subtract wispy high-frequency detail from the base density.

    The erosion magnitude is an equal-weight blend of the four erosion
    channels with B and A scaled by 0.3, and the result is
    clamp(remap(base, e * strength, 1, 0, 1), 0, 1), which can only reduce
    density (erode(b) <= b for base in [0, 1]).
    """
    coord = _erosion_texture_coord(pos, t, params)
    tex = np.atleast_2d(sample_trilinear(erosion_tex, coord))
    e = 0.25 * tex[:, 0] + 0.25 * tex[:, 1] + 0.25 * (0.3 * tex[:, 2]) + 0.25 * (0.3 * tex[:, 3])
    base_arr = np.atleast_1d(np.asarray(base, dtype=np.float64))
    out = np.clip(remap(base_arr, e * params.erosion_strength, 1.0, 0.0, 1.0), 0.0, 1.0)
    single = np.asarray(base).ndim == 0 and np.asarray(pos).ndim == 1
    return float(out[0]) if single else out


def extinction_at(pos, t: float, params: CloudParams, layer: CloudLayer,
                  textures: TextureSet) -> DensitySample:
    """Extinction coefficient (km^-1) at world positions.

    sigma_t = sigma_max * erode(base_shape * vertical_profile); exactly
    zero at and beyond the layer boundaries.
    """
    pos_arr = np.asarray(pos, dtype=np.float64)
    single = pos_arr.ndim == 1
    pts = pos_arr.reshape(-1, 3)

    h = normalized_height(pts, layer)
    inside = (h > 0.0) & (h < 1.0)
    extinction = np.zeros(pts.shape[0])
    shape_dbg = np.zeros(pts.shape[0])

    if np.any(inside):
        pin = pts[inside]
        shaped = base_shape(pin, t, params, textures.base) * vertical_profile(h[inside], params.C_type)
        eroded = erode(shaped, pin, t, params, textures.erosion)
        extinction[inside] = params.sigma_max * np.atleast_1d(eroded)
        shape_dbg[inside] = np.atleast_1d(shaped)

    if single:
        return DensitySample(extinction=float(extinction[0]), base_shape=float(shape_dbg[0]))
    return DensitySample(extinction=extinction, base_shape=shape_dbg)


def coverage_fraction(params: CloudParams, layer: CloudLayer, textures: TextureSet,
                      resolution: int = 32, t: float = 0.0) -> float:
    """Fraction of occupied cells on a regular grid through the layer.

    The grid spans one horizontal base-tiling period and the full layer
    height; a cell counts as occupied when its extinction exceeds
    1e-6 * sigma_max. Used as the deterministic sky-fill oracle.
    """
    if resolution < 16:
        raise ParameterError(f"coverage resolution must be >= 16, got {resolution}")
    period = params.b_tiling_km / params.base_noise_frequency
    xs = (np.arange(resolution) + 0.5) / resolution * period
    zs = layer.bottom_altitude_km + (np.arange(resolution) + 0.5) / resolution * layer.thickness_km
    gx, gy, gz = np.meshgrid(xs, xs, zs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=-1)
    sample = extinction_at(pts, t, params, layer, textures)
    return float(np.mean(sample.extinction > EXTINCTION_COVERAGE_THRESHOLD * params.sigma_max))
