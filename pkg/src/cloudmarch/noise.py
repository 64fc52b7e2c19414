"""Deterministic, tileable 3D noise generators and volume baking.

All generators are periodic with period 1 on each axis of the unit cube,
fully determined by (spec, seed, point), and free of global state. The
heavy per-point loops live in ``_noise_kernels``; this module owns the
lattice tables, octave stacking, and the two stock 4-channel composites
used as cloud base and erosion textures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Tuple, Union

import numpy as np

from . import _noise_kernels as _nk
from ._common import cell_hash, hash_unit, mix64, remap, seed_to_u64, sub_seed
from .errors import ParameterError, ResourceError
from .volume import VolumeTexture

NOISE_KINDS = ("perlin", "worley", "perlin_worley", "curly_alligator")

FreqLike = Union[int, Tuple[int, int, int]]

#: Unit gradient directions along the 12 cube edges.
_EDGE_GRADS = np.array(
    [
        [1, 1, 0], [-1, 1, 0], [1, -1, 0], [-1, -1, 0],
        [1, 0, 1], [-1, 0, 1], [1, 0, -1], [-1, 0, -1],
        [0, 1, 1], [0, -1, 1], [0, 1, -1], [0, -1, -1],
    ],
    dtype=np.float64,
) / math.sqrt(2.0)

# Role salts for deriving decorrelated child seeds from one texture seed.
_ROLE_PW_PERLIN = 1
_ROLE_PW_WORLEY_R = 2
_ROLE_PW_WORLEY_G = 3
_ROLE_PW_WORLEY_B = 4
_ROLE_PW_WORLEY_A = 5
_ROLE_CURL_POT_X = 11
_ROLE_CURL_POT_Y = 12
_ROLE_CURL_POT_Z = 13
_ROLE_CELL_BASE = 21

#: Texture-space displacement applied per unit of curl magnitude.
CURL_ADVECT_STRENGTH = 0.03
#: Central-difference step for the curl of the vector potential.
CURL_DIFF_STEP = 1.0 / 256.0
#: Exponent of the ridged cellular channels (cell value squared).
RIDGE_EXPONENT = 2


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters that fully determine one noise field.

    base_frequency is the integer lattice cell count per unit period,
    either a single int (isotropic) or one int per axis.
    """

    kind: str = "perlin"
    base_frequency: FreqLike = 4
    octaves: int = 1
    lacunarity: float = 2.0
    gain: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        freqs = self.frequencies()
        if any(f < 1 for f in freqs):
            raise ParameterError(f"base_frequency must be >= 1 per axis, got {self.base_frequency!r}")
        if self.octaves < 1:
            raise ParameterError(f"octaves must be >= 1, got {self.octaves}")
        if not self.lacunarity > 1.0:
            raise ParameterError(f"lacunarity must be > 1, got {self.lacunarity}")
        if not 0.0 < self.gain < 1.0:
            raise ParameterError(f"gain must be in (0, 1), got {self.gain}")

    def frequencies(self) -> Tuple[int, int, int]:
        f = self.base_frequency
        if isinstance(f, (tuple, list)):
            if len(f) != 3:
                raise ParameterError(f"base_frequency tuple must have 3 axes, got {f!r}")
            return int(f[0]), int(f[1]), int(f[2])
        return int(f), int(f), int(f)


def _as_points(p) -> Tuple[np.ndarray, bool]:
    a = np.asarray(p, dtype=np.float64)
    single = a.ndim == 1
    pts = np.ascontiguousarray(a.reshape(-1, 3))
    return pts, single


@lru_cache(maxsize=128)
def _gradient_table(fx: int, fy: int, fz: int, seed: int) -> np.ndarray:
    ii, jj, kk = np.meshgrid(np.arange(fx), np.arange(fy), np.arange(fz), indexing="ij")
    h = cell_hash(ii, jj, kk, seed_to_u64(seed))
    table = _EDGE_GRADS[(h % np.uint64(12)).astype(np.intp)]
    return np.ascontiguousarray(table)


@lru_cache(maxsize=128)
def _jitter_table(fx: int, fy: int, fz: int, seed: int) -> np.ndarray:
    ii, jj, kk = np.meshgrid(np.arange(fx), np.arange(fy), np.arange(fz), indexing="ij")
    h = cell_hash(ii, jj, kk, seed_to_u64(seed))
    jit = np.stack(
        [hash_unit(mix64(h ^ seed_to_u64(axis_salt))) for axis_salt in (0xA1, 0xB2, 0xC3)],
        axis=-1,
    )
    return np.ascontiguousarray(jit)


def worley_feature_points(spec: NoiseSpec) -> np.ndarray:
    """All feature points of the cellular lattice, in texture space.

    Returns an (fx*fy*fz, 3) array; exposed so tests can brute-force F1.
    """
    fx, fy, fz = spec.frequencies()
    jit = _jitter_table(fx, fy, fz, spec.seed)
    ii, jj, kk = np.meshgrid(np.arange(fx), np.arange(fy), np.arange(fz), indexing="ij")
    cells = np.stack([ii, jj, kk], axis=-1).astype(np.float64)
    pts = (cells + jit) / np.array([fx, fy, fz], dtype=np.float64)
    return pts.reshape(-1, 3)


def perlin3(p, spec: NoiseSpec):
    """Single-octave gradient noise in [-1, 1]; exactly 0 at lattice points."""
    pts, single = _as_points(p)
    fx, fy, fz = spec.frequencies()
    grads = _gradient_table(fx, fy, fz, spec.seed)
    out = np.empty(pts.shape[0], dtype=np.float64)
    _nk.perlin_batch(pts, fx, fy, fz, grads, out)
    return float(out[0]) if single else out


def worley3(p, spec: NoiseSpec):
    """Single-octave inverted cellular noise in [0, 1]; 1 at feature points."""
    pts, single = _as_points(p)
    fx, fy, fz = spec.frequencies()
    jit = _jitter_table(fx, fy, fz, spec.seed)
    out = np.empty(pts.shape[0], dtype=np.float64)
    _nk.worley_batch(pts, fx, fy, fz, jit, out)
    return float(out[0]) if single else out


def fbm(base_op: Callable, p, spec: NoiseSpec):
    """Octave sum of base_op, renormalized into the base op's output range.

    Octave i runs at frequency round(base_frequency * lacunarity**i),
    rounded to an integer so every octave tiles exactly, with child seed
    spec.seed + i.
    """
    fx, fy, fz = spec.frequencies()
    total = None
    norm = 0.0
    amp = 1.0
    for octave in range(spec.octaves):
        scale = spec.lacunarity ** octave
        freq = (
            max(1, round(fx * scale)),
            max(1, round(fy * scale)),
            max(1, round(fz * scale)),
        )
        osc = replace(spec, base_frequency=freq, octaves=1, seed=spec.seed + octave)
        contrib = base_op(p, osc)
        total = amp * np.asarray(contrib, dtype=np.float64) if total is None else total + amp * np.asarray(contrib)
        norm += amp
        amp *= spec.gain
    result = total / norm
    if result.ndim == 0:
        return float(result)
    return result


def perlin_worley_specs(seed: int) -> dict:
    """The documented octave recipe behind perlin_worley_base."""
    return {
        "perlin": NoiseSpec("perlin", 4, octaves=5, seed=sub_seed(seed, _ROLE_PW_PERLIN)),
        "worley_r": NoiseSpec("worley", 4, octaves=3, seed=sub_seed(seed, _ROLE_PW_WORLEY_R)),
        "worley_g": NoiseSpec("worley", 8, octaves=3, seed=sub_seed(seed, _ROLE_PW_WORLEY_G)),
        "worley_b": NoiseSpec("worley", 16, octaves=3, seed=sub_seed(seed, _ROLE_PW_WORLEY_B)),
        "worley_a": NoiseSpec("worley", 32, octaves=2, seed=sub_seed(seed, _ROLE_PW_WORLEY_A)),
    }


def perlin_worley_base(p, seed: int) -> np.ndarray:
    """4-channel cloud base composite, each channel in [0, 1].

    R is Perlin FBM (mapped to [0,1]) dilated by Worley FBM via
    remap(perlin01, worley - 1, 1, 0, 1); G/B/A are Worley FBM at
    successively doubled base frequencies.
    """
    pts, single = _as_points(p)
    specs = perlin_worley_specs(seed)
    perlin01 = 0.5 * (1.0 + fbm(perlin3, pts, specs["perlin"]))
    worley_r = fbm(worley3, pts, specs["worley_r"])
    r = np.clip(remap(perlin01, worley_r - 1.0, 1.0, 0.0, 1.0), 0.0, 1.0)
    g = fbm(worley3, pts, specs["worley_g"])
    b = fbm(worley3, pts, specs["worley_b"])
    a = fbm(worley3, pts, specs["worley_a"])
    out = np.stack([r, g, b, a], axis=-1)
    return out[0] if single else out


def curly_specs(seed: int) -> dict:
    """The documented recipe behind curly_alligator."""
    return {
        "potential": tuple(
            NoiseSpec("perlin", 4, octaves=3, seed=sub_seed(seed, role))
            for role in (_ROLE_CURL_POT_X, _ROLE_CURL_POT_Y, _ROLE_CURL_POT_Z)
        ),
        "cells": tuple(
            NoiseSpec("worley", 4 * (2 ** i), octaves=1, seed=sub_seed(seed, _ROLE_CELL_BASE + i))
            for i in range(4)
        ),
    }


def _curl(pts: np.ndarray, potential) -> np.ndarray:
    h = CURL_DIFF_STEP
    ex = np.array([h, 0.0, 0.0])
    ey = np.array([0.0, h, 0.0])
    ez = np.array([0.0, 0.0, h])

    def d(spec, axis_vec):
        return (fbm(perlin3, pts + axis_vec, spec) - fbm(perlin3, pts - axis_vec, spec)) / (2.0 * h)

    px, py, pz = potential
    curl_x = d(pz, ey) - d(py, ez)
    curl_y = d(px, ez) - d(pz, ex)
    curl_z = d(py, ex) - d(px, ey)
    return np.stack([curl_x, curl_y, curl_z], axis=-1)


def curly_alligator(p, seed: int) -> np.ndarray:
    """4-channel wispy erosion composite, each channel in [0, 1].

    Ridged cellular noise (cell value squared) evaluated at positions
    advected along the curl of a 3-channel gradient-noise vector potential
    (divergence-free, so the striations never pile up); channel frequencies
    run at ratios 1:2:4:8. Consumers scale channels B and A by 0.3 at
    sampling time; nothing is pre-scaled here.
    """
    pts, single = _as_points(p)
    specs = curly_specs(seed)
    q = pts + CURL_ADVECT_STRENGTH * _curl(pts, specs["potential"])
    channels = [worley3(q, cspec) ** RIDGE_EXPONENT for cspec in specs["cells"]]
    out = np.stack(channels, axis=-1)
    return out[0] if single else out


def bake_volume(generator: Callable, dims, seed: int, color_id: str = "baked",
                chunk_points: int = 1 << 20) -> VolumeTexture:
    """Evaluate a generator at voxel cell centers into a VolumeTexture.

    generator(points, seed) maps an (N, 3) array of texture-space points to
    (N,) or (N, C) values. Voxel (i, j, k) holds the generator at
    ((i+0.5)/Nx, (j+0.5)/Ny, (k+0.5)/Nz), which makes the bake seamless
    under wrap sampling.
    """
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),) * 3
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) < 2:
        raise ParameterError(f"bake dims must be >= 2 per axis, got {(nx, ny, nz)}")

    cx = (np.arange(nx) + 0.5) / nx
    cy = (np.arange(ny) + 0.5) / ny
    cz = (np.arange(nz) + 0.5) / nz

    slab = max(1, chunk_points // (nx * ny))
    voxels = None
    try:
        for z0 in range(0, nz, slab):
            z1 = min(nz, z0 + slab)
            zz, yy, xx = np.meshgrid(cz[z0:z1], cy, cx, indexing="ij")
            pts = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)
            vals = np.asarray(generator(pts, seed), dtype=np.float64)
            if vals.ndim == 1:
                vals = vals[:, None]
            if voxels is None:
                voxels = np.empty((nz, ny, nx, vals.shape[1]), dtype=np.float32)
            voxels[z0:z1] = vals.reshape(z1 - z0, ny, nx, vals.shape[1]).astype(np.float32)
    except MemoryError as exc:
        raise ResourceError(f"volume bake of dims {(nx, ny, nz)} exceeded available memory") from exc

    return VolumeTexture(dims=(nx, ny, nz), channels=voxels.shape[3], voxels=voxels, color_id=color_id)
