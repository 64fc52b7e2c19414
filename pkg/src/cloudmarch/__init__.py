"""Engine-independent volumetric cloud renderer.

Pipeline: tileable 3D noise is baked into volume textures, a layered cloud
field turns them into an extinction coefficient, and a single-scattering
ray marcher integrates sun and ambient light along camera rays. A CLI and
an HTTP service expose rendering, benchmarking, and dataset generation.
"""

from .config import BOUNDS, SceneConfig, TextureRefs, load_config, save_config, scene_schema
from .errors import CloudmarchError, FormatError, ParameterError, ResourceError
from .field import CloudLayer, CloudParams, TextureSet, coverage_fraction, extinction_at
from .march import (Camera, HdrImage, MarchParams, MarchStats, Sun, image_diff,
                    march, render, shadow_march, tone_map)
from .noise import NoiseSpec, bake_volume, curly_alligator, fbm, perlin3, perlin_worley_base, worley3
from .optics import (HgdModel, TthgModel, draine_phase, hg_phase, hgd_fit, hgd_phase,
                     powder, transmittance, tthg_phase)
from .presets import PRESET_NAMES, preset
from .volume import AtlasLayout, VolumeTexture, load_volume, sample_trilinear, save_volume

__version__ = "0.1.0"

__all__ = [
    "AtlasLayout", "BOUNDS", "Camera", "CloudLayer", "CloudParams", "CloudmarchError",
    "FormatError", "HdrImage", "HgdModel", "MarchParams", "MarchStats", "NoiseSpec",
    "PRESET_NAMES", "ParameterError", "ResourceError", "SceneConfig", "Sun",
    "TextureRefs", "TextureSet", "TthgModel", "VolumeTexture", "bake_volume",
    "coverage_fraction", "curly_alligator", "draine_phase", "extinction_at", "fbm",
    "hg_phase", "hgd_fit", "hgd_phase", "image_diff", "load_config", "load_volume",
    "march", "perlin3", "perlin_worley_base", "powder", "preset", "render",
    "sample_trilinear", "save_config", "save_volume", "scene_schema", "shadow_march", "tone_map",
    "transmittance", "tthg_phase", "worley3",
]
