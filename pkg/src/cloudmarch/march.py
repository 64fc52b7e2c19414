"""Primary-ray and shadow-ray marching, producing HDR radiance images.

The marcher steps through the cloud layer with equidistant samples and a
fixed per-pixel jitter, attenuating by Beer-Lambert transmittance and
accumulating single-scattered sunlight (shaped by the scene's phase
function and the powder dark-edge factor) plus a constant ambient term.
Rays exit early once transmittance falls below the configured threshold.
The background sky gradient and sun disk are composited under the cloud's
remaining transmittance. Everything is deterministic: one SceneConfig
yields one bit-identical image.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _march_kernels as _mk
from ._common import cell_hash, hash_unit, seed_to_u64, smoothstep
from .errors import ParameterError
from .field import (CloudLayer, CloudParams, TextureSet,
                    _CUMULUS_TABLE, _STRATUS_TABLE)
from .optics import PhaseModel

#: Hard cap on any marched distance, so grazing planar rays stay finite.
MAX_TRACE_KM = 300.0
#: Shadow sample count saturates once the segment reaches this many layer
#: thicknesses; below it the count scales linearly with segment length.
SHADOW_SPAN_FACTOR = 16.0
#: Optical depth beyond which a shadow ray is treated as fully opaque.
SHADOW_TAU_CUTOFF = 11.5
#: Scattering weight (T * sigma * ds * albedo) below which the sun term is
#: skipped; bounds the skipped energy far under image tolerances.
WEIGHT_SKIP = 1e-8

_SKY_ZENITH = np.array([0.25, 0.45, 0.85])
_SKY_HORIZON = np.array([0.85, 0.92, 1.05])
_GROUND_RGB = np.array([0.22, 0.2, 0.18])
_SUN_DISK_COS_INNER = math.cos(math.radians(0.35))
_SUN_DISK_COS_OUTER = math.cos(math.radians(0.65))
_SUN_DISK_GAIN = 8.0

_HDR_MAGIC = b"HDRF"


@dataclass(frozen=True)
class MarchParams:
    """Sampling budget of the marcher."""

    view_samples_base: int = 768
    view_scale: float = 4.0
    shadow_samples_base: int = 80
    shadow_scale: float = 4.0
    transmittance_threshold: float = 0.005

    def __post_init__(self):
        if self.view_count < 1 or self.shadow_count < 1:
            raise ParameterError("sample counts must be >= 1 after scaling")
        if not 0.0 <= self.transmittance_threshold < 0.5:
            raise ParameterError(
                f"transmittance_threshold must be in [0, 0.5), got {self.transmittance_threshold}")

    @property
    def view_count(self) -> int:
        return int(round(self.view_samples_base * self.view_scale))

    @property
    def shadow_count(self) -> int:
        return int(round(self.shadow_samples_base * self.shadow_scale))


@dataclass(frozen=True)
class Sun:
    """Directional sun light; direction points toward the sun."""

    direction: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    irradiance: Tuple[float, float, float] = (20.0, 19.0, 17.5)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.float64)
        norm = float(np.linalg.norm(d))
        if norm < 1e-12:
            raise ParameterError("sun direction must be a nonzero vector")
        # Skip renormalizing unit input so reconstruction is bit-stable.
        if abs(norm - 1.0) > 1e-12:
            d = d / norm
        object.__setattr__(self, "direction", tuple(d.tolist()))
        e = tuple(float(v) for v in self.irradiance)
        if len(e) != 3 or any(v < 0 for v in e):
            raise ParameterError(f"irradiance must be 3 nonnegative values, got {self.irradiance!r}")
        object.__setattr__(self, "irradiance", e)

    @property
    def elevation_deg(self) -> float:
        return math.degrees(math.asin(max(-1.0, min(1.0, self.direction[2]))))

    @property
    def azimuth_deg(self) -> float:
        return math.degrees(math.atan2(self.direction[1], self.direction[0]))

    @classmethod
    def from_angles(cls, elevation_deg: float, azimuth_deg: float = 0.0,
                    irradiance=(20.0, 19.0, 17.5)) -> "Sun":
        el = math.radians(elevation_deg)
        az = math.radians(azimuth_deg)
        d = (math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el))
        return cls(direction=d, irradiance=tuple(irradiance))


@dataclass(frozen=True)
class Camera:
    """Pinhole camera with an orthonormalized basis (z up)."""

    position: Tuple[float, float, float] = (0.0, 0.0, 0.2)
    forward: Tuple[float, float, float] = (1.0, 0.0, 0.21)
    up: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    vfov_deg: float = 55.0
    resolution: Tuple[int, int] = (640, 360)

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.float64)
        n = float(np.linalg.norm(fwd))
        if n < 1e-12:
            raise ParameterError("camera forward must be nonzero")
        # Already-orthonormal bases pass through bit-identically so that
        # construct -> serialize -> construct is a fixed point.
        if abs(n - 1.0) > 1e-12:
            fwd = fwd / n
        up = np.asarray(self.up, dtype=np.float64)
        dot = float(np.dot(up, fwd))
        if abs(dot) > 1e-12:
            up = up - fwd * dot
        n = float(np.linalg.norm(up))
        if n < 1e-9:
            raise ParameterError("camera up is parallel to forward")
        if abs(n - 1.0) > 1e-12:
            up = up / n
        object.__setattr__(self, "forward", tuple(fwd.tolist()))
        object.__setattr__(self, "up", tuple(up.tolist()))
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        w, h = (int(v) for v in self.resolution)
        if w < 1 or h < 1:
            raise ParameterError(f"resolution must be positive, got {self.resolution}")
        object.__setattr__(self, "resolution", (w, h))
        if not 1.0 <= self.vfov_deg < 179.0:
            raise ParameterError(f"vfov_deg must be in [1, 179), got {self.vfov_deg}")

    def ray_directions(self) -> np.ndarray:
        """Unit view directions, shape (height, width, 3), row 0 at top."""
        w, h = self.resolution
        fwd = np.asarray(self.forward)
        up = np.asarray(self.up)
        right = np.cross(fwd, up)
        half_h = math.tan(math.radians(self.vfov_deg) / 2.0)
        half_w = half_h * (w / h)
        xs = (np.arange(w) + 0.5) / w * 2.0 - 1.0
        ys = 1.0 - (np.arange(h) + 0.5) / h * 2.0
        gx, gy = np.meshgrid(xs * half_w, ys * half_h)
        dirs = fwd + gx[..., None] * right + gy[..., None] * up
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        return dirs


@dataclass
class MarchStats:
    """Instrumented counters of a render (wall time is informational)."""

    marches: int = 0
    view_samples: int = 0
    shadow_samples: int = 0
    wall_ms: float = 0.0

    @property
    def extinction_samples(self) -> int:
        return self.view_samples + self.shadow_samples


@dataclass
class HdrImage:
    """Linear-light HDR image with an optional transmittance channel."""

    width: int
    height: int
    pixels: np.ndarray
    transmittance: Optional[np.ndarray] = None
    stats: Optional[MarchStats] = None

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.pixels.shape != (self.height, self.width, 3):
            raise ParameterError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x3")
        if not np.isfinite(self.pixels).all() or (self.pixels < 0).any():
            raise ParameterError("HDR pixels must be finite and >= 0")
        if self.transmittance is not None:
            self.transmittance = np.asarray(self.transmittance, dtype=np.float32)
            if self.transmittance.shape != (self.height, self.width):
                raise ParameterError("transmittance shape mismatch")


@dataclass(frozen=True)
class UniformBox:
    """Axis-aligned homogeneous medium, for analytic-oracle tests."""

    sigma: float
    lo: Tuple[float, float, float]
    hi: Tuple[float, float, float]


@dataclass(frozen=True)
class FieldBundle:
    """Everything the kernel needs to evaluate extinction."""

    layer: CloudLayer
    params: Optional[CloudParams] = None
    textures: Optional[TextureSet] = None
    box: Optional[UniformBox] = None
    time_s: float = 0.0

    def __post_init__(self):
        if self.box is None and (self.params is None or self.textures is None):
            raise ParameterError("FieldBundle needs either a box or params+textures")


_METHOD_IDS = {"composite_remap": 0.0, "coverage_carve": 1.0, "channel_lerp": 2.0}
_DUMMY_VOX = np.zeros((1, 1, 1, 4), dtype=np.float32)


def _pack_field(bundle: FieldBundle) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pack a FieldBundle into (fp vector, base voxels, erosion voxels)."""
    fp = np.zeros(28, dtype=np.float64)
    layer = bundle.layer
    fp[16] = 0.0 if layer.geometry == "planar_slab" else 1.0
    fp[17] = layer.bottom_altitude_km
    fp[18] = layer.thickness_km
    fp[19] = layer.planet_radius_km

    if bundle.box is not None:
        fp[20] = 1.0
        fp[21] = bundle.box.sigma
        fp[22:25] = bundle.box.lo
        fp[25:28] = bundle.box.hi
        return fp, _DUMMY_VOX, _DUMMY_VOX

    p = bundle.params
    t = bundle.time_s
    fp[0] = _METHOD_IDS[p.method]
    fp[1] = p.P3
    fp[2] = p.P4
    fp[3] = p.C_type
    fp[4] = p.C_wispy
    fp[5] = p.C_billowy
    fp[6] = p.base_noise_frequency / p.b_tiling_km
    fp[7] = p.erosion_noise_frequency / p.e_tiling_km
    wind = np.asarray(p.wind_kmps)
    fp[8:11] = wind * t
    fp[11:14] = wind * (t * p.erosion_motion_scale)
    fp[14] = p.erosion_strength
    fp[15] = p.sigma_max
    return fp, bundle.textures.base.voxels, bundle.textures.erosion.voxels


def _pack_march(mparams: MarchParams, layer: CloudLayer, albedo: float) -> np.ndarray:
    mp = np.zeros(8, dtype=np.float64)
    mp[0] = mparams.view_count
    mp[1] = mparams.transmittance_threshold
    mp[2] = mparams.shadow_count
    mp[3] = SHADOW_SPAN_FACTOR * layer.thickness_km
    mp[4] = albedo
    mp[5] = WEIGHT_SKIP
    mp[6] = SHADOW_TAU_CUTOFF
    mp[7] = MAX_TRACE_KM
    return mp


def layer_intersect(origins, dirs, layer: CloudLayer,
                    max_trace_km: float = MAX_TRACE_KM) -> np.ndarray:
    """Parametric overlap of rays with the layer, shape (N, 4).

    Columns are (enter0, exit0, enter1, exit1); an interval with
    exit <= enter is absent. Planar slabs yield one interval; spherical
    shells up to two (a ray can dip through the shell twice).
    """
    o = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    d = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    n = max(o.shape[0], d.shape[0])
    o = np.broadcast_to(o, (n, 3))
    d = np.broadcast_to(d, (n, 3))
    segs = np.zeros((n, 4))
    segs[:, 0] = 0.0
    segs[:, 1] = -1.0
    segs[:, 2] = 0.0
    segs[:, 3] = -1.0

    if layer.geometry == "planar_slab":
        bottom = layer.bottom_altitude_km
        top = bottom + layer.thickness_km
        oz = o[:, 2]
        dz = d[:, 2]
        vertical = np.abs(dz) > 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (bottom - oz) / dz
            tb = (top - oz) / dz
        lo = np.where(vertical, np.minimum(ta, tb), 0.0)
        hi = np.where(vertical, np.maximum(ta, tb), np.where(
            (oz > bottom) & (oz < top), np.inf, -np.inf))
        lo = np.maximum(lo, 0.0)
        hi = np.minimum(hi, max_trace_km)
        valid = hi > lo
        segs[:, 0] = np.where(valid, lo, 0.0)
        segs[:, 1] = np.where(valid, hi, -1.0)
        return segs

    center = np.array([0.0, 0.0, -layer.planet_radius_km])
    rel = o - center
    r_in = layer.planet_radius_km + layer.bottom_altitude_km
    r_out = r_in + layer.thickness_km

    def sphere_hits(radius):
        b = np.sum(rel * d, axis=1)
        c = np.sum(rel * rel, axis=1) - radius * radius
        disc = b * b - c
        ok = disc > 0.0
        sq = np.sqrt(np.maximum(disc, 0.0))
        return ok, -b - sq, -b + sq

    ok_o, lo_o, hi_o = sphere_hits(r_out)
    ok_i, lo_i, hi_i = sphere_hits(r_in)

    a = np.maximum(lo_o, 0.0)
    b_ = np.minimum(hi_o, max_trace_km)
    outer_valid = ok_o & (b_ > a)

    inner_blocks = ok_i & (hi_i > a[:]) & (lo_i < b_[:])
    i0 = np.maximum(lo_i, a)
    i1 = np.minimum(hi_i, b_)

    first_valid = outer_valid & (~inner_blocks | (i0 > a))
    first_hi = np.where(inner_blocks, i0, b_)
    segs[:, 0] = np.where(first_valid, a, 0.0)
    segs[:, 1] = np.where(first_valid, first_hi, -1.0)

    second_valid = outer_valid & inner_blocks & (b_ > i1)
    segs[:, 2] = np.where(second_valid, i1, 0.0)
    segs[:, 3] = np.where(second_valid, b_, -1.0)

    # A ray starting between the spheres with the inner hit behind it has
    # its live interval in the "second" slot; normalize so slot 0 is used.
    swap = (segs[:, 1] <= segs[:, 0]) & (segs[:, 3] > segs[:, 2])
    segs[swap, 0:2] = segs[swap, 2:4]
    segs[swap, 2] = 0.0
    segs[swap, 3] = -1.0
    return segs


def _phase_values(model: PhaseModel, dirs: np.ndarray, sun: Sun) -> np.ndarray:
    cos_theta = np.clip(dirs @ np.asarray(sun.direction), -1.0, 1.0)
    return np.asarray(model.evaluate(cos_theta), dtype=np.float64)


def _pixel_jitter(width: int, height: int, seed: int) -> np.ndarray:
    xx, yy = np.meshgrid(np.arange(width), np.arange(height))
    return hash_unit(cell_hash(xx, yy, np.zeros_like(xx), seed_to_u64(seed)))


def march_rays(origins, dirs, bundle: FieldBundle, sun: Sun, phase_model: PhaseModel,
               mparams: MarchParams, albedo: float = 0.95,
               ambient_rgb=(0.0, 0.0, 0.0), jitter=0.5):
    """March a flat batch of rays; returns (radiance (N,3), T (N,), stats).

    jitter is either a scalar in [0, 1) applied to every ray or an (N,)
    array of per-ray sample offsets.
    """
    o = np.ascontiguousarray(np.atleast_2d(np.asarray(origins, dtype=np.float64)))
    d = np.ascontiguousarray(np.atleast_2d(np.asarray(dirs, dtype=np.float64)))
    n = max(o.shape[0], d.shape[0])
    o = np.ascontiguousarray(np.broadcast_to(o, (n, 3)))
    d = np.ascontiguousarray(np.broadcast_to(d, (n, 3)))

    segs = layer_intersect(o, d, bundle.layer)
    phase_vals = _phase_values(phase_model, d, sun)
    xis = np.full(n, jitter, dtype=np.float64) if np.isscalar(jitter) else \
        np.ascontiguousarray(np.asarray(jitter, dtype=np.float64))

    fp, bvox, evox = _pack_field(bundle)
    mp = _pack_march(mparams, bundle.layer, albedo)
    sun_dir = np.asarray(sun.direction, dtype=np.float64)
    sun_e = np.asarray(sun.irradiance, dtype=np.float64)
    ambient = np.asarray(ambient_rgb, dtype=np.float64)

    out_rgb = np.empty((n, 3), dtype=np.float64)
    out_t = np.empty(n, dtype=np.float64)
    out_counts = np.empty((n, 2), dtype=np.int64)

    t0 = time.perf_counter()
    _mk.march_kernel(o, d, segs, phase_vals, xis, fp, mp, sun_dir, sun_e, ambient,
                     _STRATUS_TABLE, _CUMULUS_TABLE, bvox, evox,
                     out_rgb, out_t, out_counts)
    wall_ms = (time.perf_counter() - t0) * 1000.0

    stats = MarchStats(
        marches=n,
        view_samples=int(out_counts[:, 0].sum()),
        shadow_samples=int(out_counts[:, 1].sum()),
        wall_ms=wall_ms,
    )
    return out_rgb, out_t, stats


def march(origin, direction, bundle: FieldBundle, sun: Sun, phase_model: PhaseModel,
          mparams: MarchParams, albedo: float = 0.95, ambient_rgb=(0.0, 0.0, 0.0),
          jitter: float = 0.5):
    """Single-ray march; returns {"radiance": (3,), "transmittance": float}."""
    rgb, t, _ = march_rays(origin, direction, bundle, sun, phase_model, mparams,
                           albedo=albedo, ambient_rgb=ambient_rgb, jitter=jitter)
    return {"radiance": rgb[0], "transmittance": float(t[0])}


def shadow_march(pos, sun: Sun, bundle: FieldBundle, mparams: MarchParams):
    """Sun-ward transmittance from in-layer points.

    Returns (transmittance, samples_taken); arrays when pos is (N, 3).
    The sample count adapts to the segment length: it saturates at
    shadow_samples_base * shadow_scale once the segment spans
    SHADOW_SPAN_FACTOR layer thicknesses, and never drops below 2.
    """
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(pos, dtype=np.float64)))
    fp, bvox, evox = _pack_field(bundle)
    mp = _pack_march(mparams, bundle.layer, 1.0)
    out_tau = np.empty(pts.shape[0], dtype=np.float64)
    out_taken = np.empty(pts.shape[0], dtype=np.int64)
    _mk.shadow_kernel(pts, np.asarray(sun.direction, dtype=np.float64), fp, mp,
                      _STRATUS_TABLE, _CUMULUS_TABLE, bvox, evox, out_tau, out_taken)
    trans = np.where(out_tau >= SHADOW_TAU_CUTOFF, 0.0, np.exp(-out_tau))
    single = np.asarray(pos).ndim == 1
    if single:
        return float(trans[0]), int(out_taken[0])
    return trans, out_taken


def background(dirs: np.ndarray, sun: Sun) -> np.ndarray:
    """Analytic sky gradient plus sun disk, shape dirs.shape[:-1] + (3,)."""
    dz = dirs[..., 2]
    up_t = smoothstep(0.0, 0.4, dz)[..., None]
    sky = _SKY_HORIZON + (_SKY_ZENITH - _SKY_HORIZON) * up_t
    ground_t = np.clip(-dz / 0.1, 0.0, 1.0)[..., None]
    sky = sky + (_GROUND_RGB - sky) * ground_t
    cos_sun = dirs @ np.asarray(sun.direction)
    disk = smoothstep(_SUN_DISK_COS_OUTER, _SUN_DISK_COS_INNER, cos_sun)[..., None]
    return sky + disk * np.asarray(sun.irradiance) * _SUN_DISK_GAIN


def ambient_term(ambient_strength: float) -> np.ndarray:
    """Constant hemispheric ambient radiance used inside the cloud."""
    return ambient_strength * 0.5 * (_SKY_ZENITH + _SKY_HORIZON)


def render(scene, textures: Optional[TextureSet] = None) -> HdrImage:
    """Render a SceneConfig to an HDR image (one march per pixel).

    Background sky is composited as pixel = L + T * background. The
    returned image carries instrumented MarchStats.
    """
    from .config import resolve_textures

    if textures is None:
        textures = resolve_textures(scene)
    cam = scene.camera
    w, h = cam.resolution
    dirs = cam.ray_directions()
    flat_dirs = np.ascontiguousarray(dirs.reshape(-1, 3))
    origin = np.asarray(cam.position, dtype=np.float64)

    bundle = FieldBundle(layer=scene.layer, params=scene.cloud_params,
                         textures=textures, time_s=scene.time_s)
    xis = _pixel_jitter(w, h, scene.seed).reshape(-1)
    rgb, t, stats = march_rays(
        np.broadcast_to(origin, (flat_dirs.shape[0], 3)), flat_dirs, bundle,
        scene.sun, scene.phase_model, scene.march_params,
        albedo=scene.albedo, ambient_rgb=ambient_term(scene.ambient_strength),
        jitter=xis)

    bg = background(dirs, scene.sun).reshape(-1, 3)
    pixels = rgb + t[:, None] * bg
    return HdrImage(
        width=w, height=h,
        pixels=pixels.reshape(h, w, 3).astype(np.float32),
        transmittance=t.reshape(h, w).astype(np.float32),
        stats=stats,
    )


def tone_map(hdr: HdrImage, exposure: float = 1.0) -> np.ndarray:
    """Reinhard x/(1+x) after exposure, gamma 2.2, to uint8 (H, W, 3)."""
    if not exposure > 0.0:
        raise ParameterError(f"exposure must be > 0, got {exposure}")
    x = hdr.pixels.astype(np.float64) * exposure
    x = x / (1.0 + x)
    x = np.power(x, 1.0 / 2.2)
    return np.clip(np.round(x * 255.0), 0, 255).astype(np.uint8)


def image_diff(a: HdrImage, b: HdrImage) -> HdrImage:
    """Per-pixel per-channel absolute difference of two HDR images."""
    if (a.width, a.height) != (b.width, b.height):
        raise ParameterError(
            f"image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    return HdrImage(width=a.width, height=a.height,
                    pixels=np.abs(a.pixels.astype(np.float64)
                                  - b.pixels.astype(np.float64)).astype(np.float32))


def write_hdr(hdr: HdrImage, path: str) -> None:
    """Raw HDR dump: magic, uint32 width/height/channels, LE float32 RGB."""
    header = _HDR_MAGIC + np.array([hdr.width, hdr.height, 3], dtype="<u4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(hdr.pixels, dtype="<f4").tobytes())


def read_hdr(path: str) -> HdrImage:
    """Read the raw HDR dump format written by write_hdr."""
    from .errors import FormatError

    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != _HDR_MAGIC:
        raise FormatError(f"{path} is not an HDR dump (bad magic)")
    w, h, c = np.frombuffer(blob[4:16], dtype="<u4")
    if c != 3:
        raise FormatError(f"unsupported channel count {c}")
    data = np.frombuffer(blob[16:], dtype="<f4")
    if data.size != w * h * c:
        raise FormatError(f"HDR payload holds {data.size} floats, expected {w * h * c}")
    return HdrImage(width=int(w), height=int(h),
                    pixels=data.reshape(int(h), int(w), 3).copy())
