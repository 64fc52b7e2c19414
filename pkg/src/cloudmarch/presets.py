"""Named scene presets.

A preset is either a single SceneConfig or an ordered list of configs
(comparison pairs and parameter sweeps). Presets only override fields of
the default scene, so every preset stays valid as defaults evolve.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Dict, List, Tuple, Union

from .config import SceneConfig, scene_to_dict
from .errors import ParameterError
from .field import CloudLayer
from .march import Sun
from .optics import HgdModel, TthgModel

#: TTHG coefficients matched to the small-droplet hgd curve (d = 0.8) by a
#: log-space least-squares fit over cos(theta) in [-1, 1]; frozen so the
#: comparison pair is stable. The match is close except at the extreme
#: forward peak, where the two-lobe model stays brighter.
FIG1_TTHG_MATCH = TthgModel(g1=0.8675, g2=-0.555, w=0.9876)

PresetResult = Union[SceneConfig, List[SceneConfig]]


def _default() -> SceneConfig:
    return SceneConfig()


def _tthg_bench() -> SceneConfig:
    return replace(SceneConfig(), phase_model=TthgModel(g1=0.75, g2=-0.3, w=0.65))


def _hgd_bench() -> SceneConfig:
    return replace(SceneConfig(), phase_model=HgdModel(d=4.7))


def _fig1_ab() -> List[SceneConfig]:
    # Broken thin clouds with the sun low and near the view axis, so the
    # forward-scattering lobe (where the two models differ most) dominates
    # the image instead of being buried under an opaque, fully shadowed deck.
    base = SceneConfig()
    scene = replace(
        base,
        sun=Sun.from_angles(35.0, 0.0),
        layer=CloudLayer(bottom_altitude_km=1.2, thickness_km=1.2),
        cloud_params=replace(base.cloud_params, P4=0.5, sigma_max=16.0,
                             erosion_strength=0.5),
        ambient_strength=0.25,
    )
    return [replace(scene, phase_model=FIG1_TTHG_MATCH),
            replace(scene, phase_model=HgdModel(d=0.8))]


def _fig3_sweep() -> List[SceneConfig]:
    base = SceneConfig()
    carve = replace(base.cloud_params, method="coverage_carve", P3=1.0)
    return [replace(base, cloud_params=replace(carve, P4=p4))
            for p4 in (0.0, 0.4, 1.2)]


def _fig5_sweep() -> List[SceneConfig]:
    base = SceneConfig()
    lerped = replace(base.cloud_params, method="channel_lerp", P3=1.0,
                     C_type=0.024, C_wispy=0.248, C_billowy=0.016)
    return [replace(base, cloud_params=replace(lerped, P4=p4))
            for p4 in (0.4, 0.85, 1.2)]


_PRESETS: Dict[str, Tuple[str, object]] = {
    "default": ("Reference scene with the tuned hyperparameters", _default),
    "tthg_bench": ("Benchmark scene using the two-lobe phase function", _tthg_bench),
    "hgd_bench": ("Benchmark scene using the droplet-size phase function (d = 4.7)",
                  _hgd_bench),
    "fig1_ab": ("Phase-function comparison pair: matched TTHG vs droplet model at d = 0.8",
                _fig1_ab),
    "fig3_sweep": ("Coverage-carve sweep, P4 in {0.0, 0.4, 1.2}", _fig3_sweep),
    "fig5_sweep": ("Channel-lerp sweep with fixed channel weights, P4 in {0.4, 0.85, 1.2}",
                   _fig5_sweep),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> PresetResult:
    """Return the named preset; lists hold comparison pairs or sweeps.

    Raises
    ------
    ParameterError
        If the name is unknown; the message lists the available presets.
    """
    try:
        _, builder = _PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
    return builder()


def preset_summaries() -> List[dict]:
    """Metadata for every preset: name, description, count, scene dicts.

    Serialized scenes ride along so API clients can load a preset's
    parameter values without a second endpoint.
    """
    out = []
    for name, (desc, builder) in _PRESETS.items():
        result = builder()
        scenes = result if isinstance(result, list) else [result]
        out.append({"name": name, "description": desc, "count": len(scenes),
                    "scenes": [scene_to_dict(s) for s in scenes]})
    return out
