"""Scattering and attenuation kernels.

Phase functions (HG, two-term HG, Draine, and the droplet-diameter
parameterized HG+Draine blend) are densities per steradian over the
scattering angle, parameterized by cos(theta). Beer-Lambert transmittance
and the powder dark-edge factor complete the single-scattering model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParameterError

FOUR_PI = 4.0 * math.pi

#: Valid droplet-diameter domain of the HG+D parameter fit, micrometers.
HGD_DOMAIN = (0.01, 50.0)


def _check_g(g: float) -> None:
    if not -1.0 < g < 1.0:
        raise ParameterError(f"asymmetry g must satisfy |g| < 1, got {g}")


def hg_phase(cos_theta, g: float):
    """Henyey-Greenstein phase function.

    p(mu) = (1 - g^2) / (4 pi (1 + g^2 - 2 g mu)^(3/2)); mean cosine is g.
    """
    _check_g(g)
    mu = np.asarray(cos_theta, dtype=np.float64)
    denom = (1.0 + g * g - 2.0 * g * mu) ** 1.5
    out = (1.0 - g * g) / (FOUR_PI * denom)
    return float(out) if out.ndim == 0 else out


def tthg_phase(cos_theta, g1: float, g2: float, w: float):
    """Two-term HG: w * hg(g1) + (1 - w) * hg(g2)."""
    if not 0.0 <= w <= 1.0:
        raise ParameterError(f"blend weight w must be in [0, 1], got {w}")
    return w * hg_phase(cos_theta, g1) + (1.0 - w) * hg_phase(cos_theta, g2)


def draine_phase(cos_theta, g: float, alpha: float):
    """Draine phase function: an HG lobe shaped by a (1 + alpha mu^2) factor.

    p(mu) = (1 - g^2) / (4 pi (1 + alpha (1 + 2 g^2) / 3))
            * (1 + alpha mu^2) / (1 + g^2 - 2 g mu)^(3/2)

    alpha = 0 reduces exactly to HG.
    """
    _check_g(g)
    if alpha < 0.0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    mu = np.asarray(cos_theta, dtype=np.float64)
    norm = (1.0 - g * g) / (FOUR_PI * (1.0 + alpha * (1.0 + 2.0 * g * g) / 3.0))
    out = norm * (1.0 + alpha * mu * mu) / (1.0 + g * g - 2.0 * g * mu) ** 1.5
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HgdFit:
    """Fitted HG+Draine blend parameters for one droplet diameter."""

    g_hg: float
    g_d: float
    alpha: float
    w_d: float


def hgd_fit(d: float) -> HgdFit:
    """Piecewise parametric fit of the HG+Draine blend to droplet diameter.

    d is the water droplet diameter in micrometers, valid over
    [0.01, 50]. The four constants-in-d expressions below are transcribed
    verbatim from the published approximate-Mie parameterization this
    model implements; they are kept in one place so they can be audited
    against that source. The fitted parameter curves are discontinuous at
    the regime seams (notably alpha at d = 1.5 and g_hg at d = 0.1); the
    blended phase function itself stays normalized and nonnegative on both
    sides.
    """
    lo, hi = HGD_DOMAIN
    if not lo <= d <= hi:
        raise ParameterError(f"droplet diameter d = {d} outside fit domain [{lo}, {hi}] um")

    if d <= 0.1:
        g_hg = 13.8 * d * d
        g_d = 1.1456 * d * math.sin(9.29044 * d)
        alpha = 250.0
        w_d = 0.252977 - 312.983 * d ** 4.3
    elif d < 1.5:
        logd = math.log(d)
        g_hg = 0.862 - 0.143 * logd * logd
        g_d = 0.379685 * math.cos(
            1.19692 * math.cos((logd - 0.238604) * (logd + 1.00667)
                               / (0.507522 - 0.15677 * logd))
            + 1.37932 * logd + 0.0625835) + 0.344213
        alpha = 250.0
        w_d = 0.146209 * math.cos(3.38707 * logd + 2.11193) + 0.316072 + 0.0778917 * logd
    elif d < 5.0:
        logd = math.log(d)
        g_hg = 0.0604931 * math.log(logd) + 0.940256
        g_d = 0.500411 - 0.081287 / (-2.0 * logd + math.tan(logd) + 1.27551)
        alpha = 7.30354 * logd + 6.31675
        w_d = 0.026914 * (logd - math.cos(5.68947 * (math.log(logd) - 0.0292149))) + 0.376475
    else:
        g_hg = math.exp(-0.0990567 / (d - 1.67154))
        g_d = math.exp(-2.20679 / (d + 3.91029) - 0.428934)
        alpha = math.exp(3.62489 - 8.29288 / (d + 5.52825))
        w_d = math.exp(-0.599085 / (d - 0.641583) - 0.665888)

    return HgdFit(g_hg=g_hg, g_d=g_d, alpha=alpha, w_d=w_d)


def hgd_phase(cos_theta, d: float):
    """Droplet-diameter parameterized blend of HG and Draine lobes.

    p = (1 - w_d) * hg(g_hg) + w_d * draine(g_d, alpha) with all four
    parameters given by hgd_fit(d).
    """
    fit = hgd_fit(d)
    return ((1.0 - fit.w_d) * hg_phase(cos_theta, fit.g_hg)
            + fit.w_d * draine_phase(cos_theta, fit.g_d, fit.alpha))


def transmittance(optical_depth):
    """Beer-Lambert fraction of light surviving the given optical depth."""
    tau = np.asarray(optical_depth, dtype=np.float64)
    if np.any(tau < 0.0):
        raise ParameterError("optical depth must be >= 0")
    out = np.exp(-tau)
    return float(out) if out.ndim == 0 else out


def powder(local_optical_depth):
    """Dark-edge factor 1 - exp(-2 tau_local), in [0, 1).

    Multiplied into in-scattered sunlight to mimic the missing multiple
    scattering inside dense cloud fronts.
    """
    tau = np.asarray(local_optical_depth, dtype=np.float64)
    out = 1.0 - np.exp(-2.0 * tau)
    return float(out) if out.ndim == 0 else out


# Phase-model descriptors used by scene configuration.

@dataclass(frozen=True)
class TthgModel:
    g1: float = 0.85
    g2: float = -0.3
    w: float = 0.7

    def __post_init__(self):
        _check_g(self.g1)
        _check_g(self.g2)
        if not 0.0 <= self.w <= 1.0:
            raise ParameterError(f"blend weight w must be in [0, 1], got {self.w}")

    def evaluate(self, cos_theta):
        return tthg_phase(cos_theta, self.g1, self.g2, self.w)


@dataclass(frozen=True)
class HgdModel:
    d: float = 4.5

    def __post_init__(self):
        lo, hi = HGD_DOMAIN
        if not lo <= self.d <= hi:
            raise ParameterError(f"droplet diameter d = {self.d} outside fit domain [{lo}, {hi}] um")

    def evaluate(self, cos_theta):
        return hgd_phase(cos_theta, self.d)


PhaseModel = Union[TthgModel, HgdModel]
