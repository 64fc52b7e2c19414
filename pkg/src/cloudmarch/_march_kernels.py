"""Compiled inner loops of the ray marcher.

One kernel marches a flat batch of rays; helpers evaluate the cloud field
(the same arithmetic as ``field.extinction_at``, cross-checked in tests)
and the sun-ward shadow march. Scalar parameters arrive packed in two
float64 vectors so the argument list stays manageable:

field params fp:
  0 method (0 composite_remap, 1 coverage_carve, 2 channel_lerp)
  1 P3   2 P4   3 C_type   4 C_wispy   5 C_billowy
  6 inv base period (1/km)   7 inv erosion period (1/km)
  8-10 base motion offset km   11-13 erosion motion offset km
  14 erosion_strength   15 sigma_max
  16 geometry (0 planar, 1 spherical)   17 bottom altitude km
  18 thickness km   19 planet radius km
  20 field mode (0 cloud, 1 uniform box)
  21 box sigma   22-24 box lo   25-27 box hi

march params mp:
  0 view sample count   1 transmittance threshold   2 shadow sample cap
  3 shadow reference length km (cap engages at this segment length)
  4 albedo   5 scattering weight below which the shadow march is skipped
  6 shadow optical-depth cutoff (treated as opaque beyond)
  7 maximum trace distance km
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

#: remap degenerate-interval epsilon, mirrors _common.REMAP_DEGENERATE_EPS.
_REMAP_EPS = 1e-6
#: voxel-coordinate snap, mirrors volume._SNAP_EPS.
_SNAP_EPS = 1e-9


@njit(cache=True, fastmath=True)
def _sample4(vox, u, v, w):
    """Trilinear wrap sample of a (Nz, Ny, Nx, 4) volume at texture coords."""
    nz, ny, nx = vox.shape[0], vox.shape[1], vox.shape[2]

    x = u * nx - 0.5
    y = v * ny - 0.5
    z = w * nz - 0.5
    x0 = math.floor(x)
    y0 = math.floor(y)
    z0 = math.floor(z)
    tx = x - x0
    ty = y - y0
    tz = z - z0
    ix = int(x0)
    iy = int(y0)
    iz = int(z0)
    if tx > 1.0 - _SNAP_EPS:
        ix += 1
        tx = 0.0
    elif tx < _SNAP_EPS:
        tx = 0.0
    if ty > 1.0 - _SNAP_EPS:
        iy += 1
        ty = 0.0
    elif ty < _SNAP_EPS:
        ty = 0.0
    if tz > 1.0 - _SNAP_EPS:
        iz += 1
        tz = 0.0
    elif tz < _SNAP_EPS:
        tz = 0.0
    ix0 = ix % nx
    iy0 = iy % ny
    iz0 = iz % nz
    ix1 = ix0 + 1
    if ix1 == nx:
        ix1 = 0
    iy1 = iy0 + 1
    if iy1 == ny:
        iy1 = 0
    iz1 = iz0 + 1
    if iz1 == nz:
        iz1 = 0

    wx0 = 1.0 - tx
    wy0 = 1.0 - ty
    wz0 = 1.0 - tz
    c000 = wx0 * wy0 * wz0
    c100 = tx * wy0 * wz0
    c010 = wx0 * ty * wz0
    c110 = tx * ty * wz0
    c001 = wx0 * wy0 * tz
    c101 = tx * wy0 * tz
    c011 = wx0 * ty * tz
    c111 = tx * ty * tz
    r = (c000 * vox[iz0, iy0, ix0, 0] + c100 * vox[iz0, iy0, ix1, 0]
         + c010 * vox[iz0, iy1, ix0, 0] + c110 * vox[iz0, iy1, ix1, 0]
         + c001 * vox[iz1, iy0, ix0, 0] + c101 * vox[iz1, iy0, ix1, 0]
         + c011 * vox[iz1, iy1, ix0, 0] + c111 * vox[iz1, iy1, ix1, 0])
    g = (c000 * vox[iz0, iy0, ix0, 1] + c100 * vox[iz0, iy0, ix1, 1]
         + c010 * vox[iz0, iy1, ix0, 1] + c110 * vox[iz0, iy1, ix1, 1]
         + c001 * vox[iz1, iy0, ix0, 1] + c101 * vox[iz1, iy0, ix1, 1]
         + c011 * vox[iz1, iy1, ix0, 1] + c111 * vox[iz1, iy1, ix1, 1])
    b = (c000 * vox[iz0, iy0, ix0, 2] + c100 * vox[iz0, iy0, ix1, 2]
         + c010 * vox[iz0, iy1, ix0, 2] + c110 * vox[iz0, iy1, ix1, 2]
         + c001 * vox[iz1, iy0, ix0, 2] + c101 * vox[iz1, iy0, ix1, 2]
         + c011 * vox[iz1, iy1, ix0, 2] + c111 * vox[iz1, iy1, ix1, 2])
    a = (c000 * vox[iz0, iy0, ix0, 3] + c100 * vox[iz0, iy0, ix1, 3]
         + c010 * vox[iz0, iy1, ix0, 3] + c110 * vox[iz0, iy1, ix1, 3]
         + c001 * vox[iz1, iy0, ix0, 3] + c101 * vox[iz1, iy0, ix1, 3]
         + c011 * vox[iz1, iy1, ix0, 3] + c111 * vox[iz1, iy1, ix1, 3])
    return r, g, b, a


@njit(cache=True, fastmath=True)
def _remap01(v, lo0):
    """clamp(remap(v, lo0, 1, 0, 1), 0, 1) with the degenerate convention."""
    span = 1.0 - lo0
    if abs(span) <= _REMAP_EPS:
        return 0.0
    out = (v - lo0) / span
    if out < 0.0:
        return 0.0
    if out > 1.0:
        return 1.0
    return out


@njit(cache=True, fastmath=True)
def _sigma_at(px, py, pz, fp, stratus, cumulus, bvox, evox):
    """Extinction coefficient (km^-1) at one world position."""
    if fp[20] != 0.0:
        # Uniform box mode for analytic-slab oracles.
        if (fp[22] <= px <= fp[25] and fp[23] <= py <= fp[26]
                and fp[24] <= pz <= fp[27]):
            return fp[21]
        return 0.0

    if fp[16] == 0.0:
        alt = pz
    else:
        zr = pz + fp[19]
        alt = math.sqrt(px * px + py * py + zr * zr) - fp[19]
    h = (alt - fp[17]) / fp[18]
    if h <= 0.0 or h >= 1.0:
        return 0.0

    u = (px + fp[8]) * fp[6]
    v = (py + fp[9]) * fp[6]
    w = (pz + fp[10]) * fp[6]
    u -= math.floor(u)
    v -= math.floor(v)
    w -= math.floor(w)
    r, g, b, a = _sample4(bvox, u, v, w)

    method = int(fp[0])
    p3 = fp[1]
    p4 = fp[2]
    if method == 0:
        detail = 0.625 * g + 0.25 * b + 0.125 * a
        shaped = _remap01(r, detail - 1.0)
        if p4 <= _REMAP_EPS:
            shape = 0.0
        else:
            p3c = p3 if p3 < 1.0 else 1.0
            shape = _remap01(shaped * p3c, 1.0 - p4)
    elif method == 1:
        if p4 <= _REMAP_EPS:
            shape = 0.0
        else:
            p3c = p3 if p3 < 1.0 else 1.0
            shape = _remap01(r * p3c, 1.0 - p4)
    else:
        m1 = r + (g - r) * fp[3]
        m2 = m1 + (b - m1) * fp[4]
        m3 = m2 + (a - m2) * fp[5]
        if p4 <= _REMAP_EPS:
            shape = 0.0
        else:
            shape = _remap01(m3 * p3, 1.0 - p4)

    if shape <= 0.0:
        return 0.0

    hh = h * 7.0
    k = int(hh)
    if k > 6:
        k = 6
    t = hh - k
    st = stratus[k] + (stratus[k + 1] - stratus[k]) * t
    cu = cumulus[k] + (cumulus[k + 1] - cumulus[k]) * t
    prof = st + (cu - st) * fp[3]
    if h < 0.07:
        ft = h / 0.07
        prof *= ft * ft * (3.0 - 2.0 * ft)
    if h > 0.85:
        ft = (h - 0.85) / 0.15
        prof *= 1.0 - ft * ft * (3.0 - 2.0 * ft)

    base = shape * prof
    if base <= 0.0:
        return 0.0

    ue = (px + fp[11]) * fp[7]
    ve = (py + fp[12]) * fp[7]
    we = (pz + fp[13]) * fp[7]
    ue -= math.floor(ue)
    ve -= math.floor(ve)
    we -= math.floor(we)
    er, eg, eb, ea = _sample4(evox, ue, ve, we)
    e = 0.25 * er + 0.25 * eg + 0.25 * (0.3 * eb) + 0.25 * (0.3 * ea)
    return fp[15] * _remap01(base, e * fp[14])


@njit(cache=True, fastmath=True)
def _sun_exit_distance(px, py, pz, sx, sy, sz, fp, max_trace):
    """Distance to the layer's sun-ward exit; negative means fully occluded."""
    if fp[20] != 0.0 or fp[16] == 0.0:
        top = fp[17] + fp[18]
        if sz > 1e-12:
            ell = (top - pz) / sz
        elif sz < -1e-12:
            ell = (fp[17] - pz) / sz
        else:
            ell = max_trace
        if ell > max_trace:
            ell = max_trace
        return ell

    cr = fp[19]
    zr = pz + cr
    b = px * sx + py * sy + zr * sz
    r2 = px * px + py * py + zr * zr
    r_in = cr + fp[17]
    disc_in = b * b - (r2 - r_in * r_in)
    if disc_in > 0.0:
        t_in = -b - math.sqrt(disc_in)
        if t_in > 0.0:
            # The sun ray dips back into the inner sphere: planet-occluded.
            return -1.0
    r_out = cr + fp[17] + fp[18]
    disc_out = b * b - (r2 - r_out * r_out)
    if disc_out <= 0.0:
        return 0.0
    ell = -b + math.sqrt(disc_out)
    if ell < 0.0:
        ell = 0.0
    if ell > max_trace:
        ell = max_trace
    return ell


@njit(cache=True, fastmath=True)
def _shadow(px, py, pz, sun_dir, fp, mp, stratus, cumulus, bvox, evox):
    """Optical depth toward the sun and the number of samples taken."""
    sx = sun_dir[0]
    sy = sun_dir[1]
    sz = sun_dir[2]
    ell = _sun_exit_distance(px, py, pz, sx, sy, sz, fp, mp[7])
    if ell < 0.0:
        return mp[6], 0
    if ell == 0.0:
        return 0.0, 0

    n_max = int(mp[2])
    n = int(math.ceil(n_max * ell / mp[3]))
    if n < 2:
        n = 2
    elif n > n_max:
        n = n_max
    ds = ell / n
    tau = 0.0
    for k in range(n):
        t = (k + 0.5) * ds
        sigma = _sigma_at(px + t * sx, py + t * sy, pz + t * sz,
                          fp, stratus, cumulus, bvox, evox)
        tau += sigma * ds
    return tau, n


@njit(cache=True, fastmath=True, parallel=True)
def march_kernel(origins, dirs, segs, phase_vals, xis,
                 fp, mp, sun_dir, sun_e, ambient,
                 stratus, cumulus, bvox, evox,
                 out_rgb, out_t, out_counts):
    """March every ray: accumulate single-scattered radiance and transmittance.

    Loop order per sample: update T with the local Beer-Lambert factor,
    then accumulate T * sigma * ds * albedo * (sun + ambient); exit once T
    drops below the threshold. out_counts[i] = (view samples, shadow
    samples) for ray i.
    """
    n_rays = origins.shape[0]
    tau_cut = mp[6]
    for i in prange(n_rays):
        ox = origins[i, 0]
        oy = origins[i, 1]
        oz = origins[i, 2]
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        xi = xis[i]
        phase = phase_vals[i]

        len0 = segs[i, 1] - segs[i, 0]
        len1 = segs[i, 3] - segs[i, 2]
        if len0 < 0.0:
            len0 = 0.0
        if len1 < 0.0:
            len1 = 0.0
        total_len = len0 + len1

        t_acc = 1.0
        lr = 0.0
        lg = 0.0
        lb = 0.0
        n_view = 0
        n_shadow = 0

        if total_len > 0.0:
            n_total = int(mp[0])
            threshold = mp[1]
            albedo = mp[4]
            w_skip = mp[5]
            done = False
            for s in range(2):
                if done:
                    break
                t0 = segs[i, 2 * s]
                t1 = segs[i, 2 * s + 1]
                seg_len = t1 - t0
                if seg_len <= 0.0:
                    continue
                if len1 > 0.0 and len0 > 0.0:
                    ns = int(round(n_total * seg_len / total_len))
                    if ns < 2:
                        ns = 2
                else:
                    ns = n_total
                ds = seg_len / ns
                for j in range(ns):
                    t = t0 + (j + xi) * ds
                    px = ox + t * dx
                    py = oy + t * dy
                    pz = oz + t * dz
                    sigma = _sigma_at(px, py, pz, fp, stratus, cumulus, bvox, evox)
                    n_view += 1
                    if sigma > 0.0:
                        t_acc *= math.exp(-sigma * ds)
                        weight = t_acc * sigma * ds * albedo
                        if weight >= w_skip:
                            tau_sun, taken = _shadow(px, py, pz, sun_dir, fp, mp,
                                                     stratus, cumulus, bvox, evox)
                            n_shadow += taken
                            if tau_sun >= tau_cut:
                                t_sun = 0.0
                            else:
                                t_sun = math.exp(-tau_sun)
                            pw = 1.0 - math.exp(-2.0 * tau_sun)
                            sun_f = t_sun * phase * pw
                            lr += weight * (sun_e[0] * sun_f + ambient[0])
                            lg += weight * (sun_e[1] * sun_f + ambient[1])
                            lb += weight * (sun_e[2] * sun_f + ambient[2])
                        else:
                            lr += weight * ambient[0]
                            lg += weight * ambient[1]
                            lb += weight * ambient[2]
                        if t_acc < threshold:
                            done = True
                            break

        out_rgb[i, 0] = lr
        out_rgb[i, 1] = lg
        out_rgb[i, 2] = lb
        out_t[i] = t_acc
        out_counts[i, 0] = n_view
        out_counts[i, 1] = n_shadow


@njit(cache=True, fastmath=True)
def shadow_kernel(points, sun_dir, fp, mp, stratus, cumulus, bvox, evox,
                  out_tau, out_taken):
    """Standalone shadow march for a batch of in-layer points."""
    for i in range(points.shape[0]):
        tau, taken = _shadow(points[i, 0], points[i, 1], points[i, 2],
                             sun_dir, fp, mp, stratus, cumulus, bvox, evox)
        out_tau[i] = tau
        out_taken[i] = taken
