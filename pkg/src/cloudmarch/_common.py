"""Shared numeric helpers: interpolation, range remapping, seeded hashing.

The hash is a splitmix64-style finalizer applied to lattice coordinates, so
every stochastic choice in the package is a pure function of (coords, seed).
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64
_SM_GAMMA = _U64(0x9E3779B97F4A7C15)
_SM_MUL1 = _U64(0xBF58476D1CE4E5B9)
_SM_MUL2 = _U64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


def seed_to_u64(seed: int) -> np.uint64:
    """Map an arbitrary Python int onto the uint64 seed domain."""
    return _U64(int(seed) & _U64_MASK)


def mix64(x):
    """splitmix64 finalizer; accepts uint64 scalars or arrays."""
    with np.errstate(over="ignore"):
        z = x + _SM_GAMMA
        z = (z ^ (z >> _U64(30))) * _SM_MUL1
        z = (z ^ (z >> _U64(27))) * _SM_MUL2
        return z ^ (z >> _U64(31))


def cell_hash(ix, iy, iz, seed_u64):
    """Seeded hash of integer lattice coordinates, uint64 output."""
    h = mix64(seed_u64)
    h = mix64(h ^ np.asarray(ix).astype(_U64))
    h = mix64(h ^ np.asarray(iy).astype(_U64))
    h = mix64(h ^ np.asarray(iz).astype(_U64))
    return h


def hash_unit(h):
    """Top 53 bits of a uint64 hash as a float in [0, 1)."""
    return (h >> _U64(11)).astype(np.float64) * 2.0**-53


def sub_seed(seed: int, role: int) -> int:
    """Derive a decorrelated child seed for a named role."""
    return int(mix64(seed_to_u64(seed) ^ seed_to_u64(role)))


def fract(x):
    return x - np.floor(x)


def lerp(a, b, t):
    return a + (b - a) * t


def smoothstep(edge0, edge1, x):
    t = np.clip((x - edge0) / (edge1 - edge0), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


#: Intervals narrower than this are treated as degenerate by remap.
REMAP_DEGENERATE_EPS = 1e-6


def remap(v, lo0, hi0, lo1, hi1):
    """Affine remap of v from [lo0, hi0] onto [lo1, hi1], unclamped.

    A degenerate source interval (|hi0 - lo0| <= 1e-6) returns lo1 instead
    of dividing by (near) zero. Inputs broadcast like numpy ufuncs.
    """
    v = np.asarray(v, dtype=np.float64)
    lo0 = np.asarray(lo0, dtype=np.float64)
    hi0 = np.asarray(hi0, dtype=np.float64)
    lo1 = np.asarray(lo1, dtype=np.float64)
    hi1 = np.asarray(hi1, dtype=np.float64)
    span = hi0 - lo0
    degenerate = np.abs(span) <= REMAP_DEGENERATE_EPS
    safe_span = np.where(degenerate, 1.0, span)
    out = lo1 + (v - lo0) * (hi1 - lo1) / safe_span
    out = np.where(degenerate, lo1, out)
    if out.ndim == 0:
        return float(out)
    return out
