"""Tight scalar loops for noise evaluation, JIT-compiled with numba.

The public API in ``noise`` prepares hash-derived lattice tables with numpy
and calls these kernels for the per-point work. Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

#: Scales 12-edge-gradient Perlin output into [-1, 1] (|raw| <= sqrt(3)/2).
PERLIN_SCALE = 2.0 / math.sqrt(3.0)


@njit(cache=True, fastmath=True)
def perlin_batch(pts, fx, fy, fz, grads, out):
    """Single-octave tileable Perlin noise at ``pts`` (texture space).

    grads holds one unit gradient per lattice cell, shape (fx, fy, fz, 3).
    Output is exactly 0 at lattice points and periodic with period 1.
    """
    n = pts.shape[0]
    for i in range(n):
        px = pts[i, 0] * fx
        py = pts[i, 1] * fy
        pz = pts[i, 2] * fz
        x0 = math.floor(px)
        y0 = math.floor(py)
        z0 = math.floor(pz)
        tx = px - x0
        ty = py - y0
        tz = pz - z0
        ix0 = int(x0) % fx
        iy0 = int(y0) % fy
        iz0 = int(z0) % fz
        ix1 = ix0 + 1
        if ix1 == fx:
            ix1 = 0
        iy1 = iy0 + 1
        if iy1 == fy:
            iy1 = 0
        iz1 = iz0 + 1
        if iz1 == fz:
            iz1 = 0

        ux = tx * tx * tx * (tx * (tx * 6.0 - 15.0) + 10.0)
        uy = ty * ty * ty * (ty * (ty * 6.0 - 15.0) + 10.0)
        uz = tz * tz * tz * (tz * (tz * 6.0 - 15.0) + 10.0)

        n000 = (grads[ix0, iy0, iz0, 0] * tx
                + grads[ix0, iy0, iz0, 1] * ty
                + grads[ix0, iy0, iz0, 2] * tz)
        n100 = (grads[ix1, iy0, iz0, 0] * (tx - 1.0)
                + grads[ix1, iy0, iz0, 1] * ty
                + grads[ix1, iy0, iz0, 2] * tz)
        n010 = (grads[ix0, iy1, iz0, 0] * tx
                + grads[ix0, iy1, iz0, 1] * (ty - 1.0)
                + grads[ix0, iy1, iz0, 2] * tz)
        n110 = (grads[ix1, iy1, iz0, 0] * (tx - 1.0)
                + grads[ix1, iy1, iz0, 1] * (ty - 1.0)
                + grads[ix1, iy1, iz0, 2] * tz)
        n001 = (grads[ix0, iy0, iz1, 0] * tx
                + grads[ix0, iy0, iz1, 1] * ty
                + grads[ix0, iy0, iz1, 2] * (tz - 1.0))
        n101 = (grads[ix1, iy0, iz1, 0] * (tx - 1.0)
                + grads[ix1, iy0, iz1, 1] * ty
                + grads[ix1, iy0, iz1, 2] * (tz - 1.0))
        n011 = (grads[ix0, iy1, iz1, 0] * tx
                + grads[ix0, iy1, iz1, 1] * (ty - 1.0)
                + grads[ix0, iy1, iz1, 2] * (tz - 1.0))
        n111 = (grads[ix1, iy1, iz1, 0] * (tx - 1.0)
                + grads[ix1, iy1, iz1, 1] * (ty - 1.0)
                + grads[ix1, iy1, iz1, 2] * (tz - 1.0))

        nx00 = n000 + ux * (n100 - n000)
        nx10 = n010 + ux * (n110 - n010)
        nx01 = n001 + ux * (n101 - n001)
        nx11 = n011 + ux * (n111 - n011)
        nxy0 = nx00 + uy * (nx10 - nx00)
        nxy1 = nx01 + uy * (nx11 - nx01)
        out[i] = PERLIN_SCALE * (nxy0 + uz * (nxy1 - nxy0))


@njit(cache=True, fastmath=True)
def worley_batch(pts, fx, fy, fz, jitter, out):
    """Single-octave tileable inverted-distance cellular noise.

    jitter holds one feature point offset per cell in [0,1)^3, shape
    (fx, fy, fz, 3). Value is 1 - clamp(F1 / d_norm, 0, 1) with F1 the
    toroidal distance to the nearest feature point in texture space and
    d_norm = ||(1/fx, 1/fy, 1/fz)||.
    """
    n = pts.shape[0]
    inv_fx = 1.0 / fx
    inv_fy = 1.0 / fy
    inv_fz = 1.0 / fz
    d_norm = math.sqrt(inv_fx * inv_fx + inv_fy * inv_fy + inv_fz * inv_fz)
    for i in range(n):
        px = pts[i, 0] * fx
        py = pts[i, 1] * fy
        pz = pts[i, 2] * fz
        cx = int(math.floor(px))
        cy = int(math.floor(py))
        cz = int(math.floor(pz))
        rx = px - cx
        ry = py - cy
        rz = pz - cz
        best = 1e30
        for dx in range(-1, 2):
            wx = (cx + dx) % fx
            bx = dx - rx
            for dy in range(-1, 2):
                wy = (cy + dy) % fy
                by = dy - ry
                for dz in range(-1, 2):
                    wz = (cz + dz) % fz
                    ddx = (bx + jitter[wx, wy, wz, 0]) * inv_fx
                    ddy = (by + jitter[wx, wy, wz, 1]) * inv_fy
                    ddz = (dz - rz + jitter[wx, wy, wz, 2]) * inv_fz
                    d2 = ddx * ddx + ddy * ddy + ddz * ddz
                    if d2 < best:
                        best = d2
        if best < 1e-24:
            # Query sits on a feature point up to float round-trip error.
            out[i] = 1.0
            continue
        v = 1.0 - math.sqrt(best) / d_norm
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        out[i] = v
