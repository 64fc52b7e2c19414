"""Scene configuration: JSON load/save with full validation, the bounds
table served to UIs, and resolution of texture references.

Every bound lives in BOUNDS exactly once; the HTTP service exposes it so
clients never hardcode ranges. Validation errors name the offending field
by dotted path. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Optional, Tuple, Union
from urllib.parse import parse_qs

from .errors import FormatError, ParameterError
from .field import CloudLayer, CloudParams, TextureSet, FIELD_METHODS, LAYER_GEOMETRIES
from .march import Camera, MarchParams, Sun
from .optics import HGD_DOMAIN, HgdModel, PhaseModel, TthgModel

#: Validation bounds, keyed by canonical dotted path. "max_exclusive" marks
#: half-open upper ends. This table is the single source of truth consumed
#: by both load_config and the /presets metadata endpoint.
BOUNDS = {
    "cloud_params.P3": {"min": 0.0, "max": 10.0},
    "cloud_params.P4": {"min": 0.0, "max": 1.5},
    "cloud_params.C_type": {"min": 0.0, "max": 1.0},
    "cloud_params.C_wispy": {"min": 0.0, "max": 1.0},
    "cloud_params.C_billowy": {"min": 0.0, "max": 1.0},
    "cloud_params.b_tiling_km": {"min": 0.1, "max": 1000.0},
    "cloud_params.e_tiling_km": {"min": 0.1, "max": 1000.0},
    "cloud_params.base_noise_frequency": {"min": 0.1, "max": 8.0},
    "cloud_params.erosion_noise_frequency": {"min": 0.1, "max": 8.0},
    "cloud_params.erosion_strength": {"min": 0.0, "max": 1.0},
    "cloud_params.erosion_motion_scale": {"min": 0.0, "max": 20.0},
    "cloud_params.sigma_max": {"min": 0.1, "max": 500.0},
    "layer.bottom_altitude_km": {"min": 0.0, "max": 50.0},
    "layer.thickness_km": {"min": 0.05, "max": 50.0},
    "layer.planet_radius_km": {"min": 1.0, "max": 100000.0},
    "phase_model.tthg.g1": {"min": -0.99, "max": 0.99},
    "phase_model.tthg.g2": {"min": -0.99, "max": 0.99},
    "phase_model.tthg.w": {"min": 0.0, "max": 1.0},
    "phase_model.hgd.d": {"min": HGD_DOMAIN[0], "max": HGD_DOMAIN[1]},
    "sun.elevation_deg": {"min": -10.0, "max": 90.0},
    "sun.azimuth_deg": {"min": -360.0, "max": 360.0},
    "march_params.view_samples_base": {"min": 1, "max": 8192},
    "march_params.view_scale": {"min": 0.1, "max": 16.0},
    "march_params.shadow_samples_base": {"min": 1, "max": 2048},
    "march_params.shadow_scale": {"min": 0.1, "max": 16.0},
    "march_params.transmittance_threshold": {"min": 0.0, "max": 0.5, "max_exclusive": True},
    "camera.vfov_deg": {"min": 1.0, "max": 179.0, "max_exclusive": True},
    "albedo": {"min": 0.0, "max": 1.0},
    "ambient_strength": {"min": 0.0, "max": 2.0},
    "exposure": {"min": 0.01, "max": 32.0},
    "time_s": {"min": 0.0, "max": 1e7},
    "preview_scale": {"min": 1, "max": 8},
}

PROCEDURAL_KINDS = ("perlin_worley", "curly_alligator")
DEFAULT_TEXTURE_DIMS = 128


@dataclass(frozen=True)
class TextureRefs:
    """References to the two field textures: procedural spec or file path."""

    base: str = "procedural:perlin_worley"
    erosion: str = "procedural:curly_alligator"


@dataclass(frozen=True)
class SceneConfig:
    """A complete, validated render description."""

    camera: Camera = Camera()
    sun: Sun = Sun.from_angles(32.0, 10.0)
    layer: CloudLayer = CloudLayer()
    cloud_params: CloudParams = CloudParams()
    phase_model: PhaseModel = TthgModel()
    march_params: MarchParams = MarchParams()
    textures: TextureRefs = TextureRefs()
    albedo: float = 0.95
    ambient_strength: float = 0.6
    exposure: float = 1.0
    seed: int = 7
    time_s: float = 0.0


def _fail(path: str, msg: str):
    raise ParameterError(f"{path}: {msg}")


def _check_dict(data, path: str, allowed) -> None:
    if not isinstance(data, dict):
        _fail(path, f"expected an object, got {type(data).__name__}")
    for key in data:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown key")


def _num(data: dict, key: str, path: str, bounds_key: Optional[str] = None,
         default=None, integer: bool = False):
    if key not in data:
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        _fail(f"{path}.{key}", f"expected an integer, got {v!r}")
    b = BOUNDS.get(bounds_key or "")
    if b:
        if v < b["min"]:
            _fail(f"{path}.{key}", f"value {v} below minimum {b['min']}")
        if b.get("max_exclusive"):
            if v >= b["max"]:
                _fail(f"{path}.{key}", f"value {v} must be below {b['max']}")
        elif v > b["max"]:
            _fail(f"{path}.{key}", f"value {v} above maximum {b['max']}")
    return int(v) if integer else float(v)


def _vec(data: dict, key: str, path: str, length: int, default=None):
    if key not in data:
        return default
    v = data[key]
    if (not isinstance(v, (list, tuple)) or len(v) != length
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)):
        _fail(f"{path}.{key}", f"expected {length} numbers, got {v!r}")
    return tuple(float(c) for c in v)


def _enum(data: dict, key: str, path: str, values, default=None):
    if key not in data:
        return default
    v = data[key]
    if v not in values:
        _fail(f"{path}.{key}", f"must be one of {sorted(values)}, got {v!r}")
    return v


def _wrap(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ParameterError as exc:
        if str(exc).startswith(path):
            raise
        raise ParameterError(f"{path}: {exc}") from exc


def _build_camera(d: dict, path: str, base: Camera) -> Camera:
    _check_dict(d, path, {"position", "forward", "up", "vfov_deg", "resolution"})
    res = d.get("resolution")
    if res is not None:
        if (not isinstance(res, (list, tuple)) or len(res) != 2
                or any(isinstance(c, bool) or not isinstance(c, int) or c < 1 for c in res)):
            _fail(f"{path}.resolution", f"expected two positive integers, got {res!r}")
        res = (int(res[0]), int(res[1]))
    return _wrap(path, Camera,
                 position=_vec(d, "position", path, 3, base.position),
                 forward=_vec(d, "forward", path, 3, base.forward),
                 up=_vec(d, "up", path, 3, base.up),
                 vfov_deg=_num(d, "vfov_deg", path, "camera.vfov_deg", base.vfov_deg),
                 resolution=res if res is not None else base.resolution)


def _build_sun(d: dict, path: str, base: Sun) -> Sun:
    _check_dict(d, path, {"direction", "elevation_deg", "azimuth_deg", "irradiance"})
    has_dir = "direction" in d
    has_ang = "elevation_deg" in d or "azimuth_deg" in d
    if has_dir and has_ang:
        _fail(path, "give either direction or elevation_deg/azimuth_deg, not both")
    irr = _vec(d, "irradiance", path, 3, base.irradiance)
    if any(v < 0 for v in irr):
        _fail(f"{path}.irradiance", f"components must be >= 0, got {irr!r}")
    if has_dir:
        return _wrap(path, Sun, direction=_vec(d, "direction", path, 3), irradiance=irr)
    if has_ang:
        el = _num(d, "elevation_deg", path, "sun.elevation_deg", base.elevation_deg)
        az = _num(d, "azimuth_deg", path, "sun.azimuth_deg", base.azimuth_deg)
        return Sun.from_angles(el, az, irr)
    return Sun(direction=base.direction, irradiance=irr)


def _build_layer(d: dict, path: str, base: CloudLayer) -> CloudLayer:
    _check_dict(d, path, {"geometry", "bottom_altitude_km", "thickness_km", "planet_radius_km"})
    return _wrap(path, CloudLayer,
                 geometry=_enum(d, "geometry", path, LAYER_GEOMETRIES, base.geometry),
                 bottom_altitude_km=_num(d, "bottom_altitude_km", path,
                                         "layer.bottom_altitude_km", base.bottom_altitude_km),
                 thickness_km=_num(d, "thickness_km", path,
                                   "layer.thickness_km", base.thickness_km),
                 planet_radius_km=_num(d, "planet_radius_km", path,
                                       "layer.planet_radius_km", base.planet_radius_km))


def _build_cloud(d: dict, path: str, base: CloudParams) -> CloudParams:
    keys = {"method", "P3", "P4", "C_type", "C_wispy", "C_billowy", "b_tiling_km",
            "e_tiling_km", "base_noise_frequency", "erosion_noise_frequency",
            "erosion_strength", "wind_kmps", "erosion_motion_scale", "sigma_max"}
    _check_dict(d, path, keys)
    kwargs = {"method": _enum(d, "method", path, FIELD_METHODS, base.method),
              "wind_kmps": _vec(d, "wind_kmps", path, 3, base.wind_kmps)}
    for name in keys - {"method", "wind_kmps"}:
        kwargs[name] = _num(d, name, path, f"cloud_params.{name}", getattr(base, name))
    return _wrap(path, CloudParams, **kwargs)


def _build_phase(d: dict, path: str, base: PhaseModel) -> PhaseModel:
    _check_dict(d, path, {"tthg", "hgd"})
    if len(d) == 0:
        return base
    if len(d) > 1:
        _fail(path, "give exactly one of tthg or hgd")
    if "tthg" in d:
        sub = d["tthg"]
        _check_dict(sub, f"{path}.tthg", {"g1", "g2", "w"})
        prev = base if isinstance(base, TthgModel) else TthgModel()
        return _wrap(f"{path}.tthg", TthgModel,
                     g1=_num(sub, "g1", f"{path}.tthg", "phase_model.tthg.g1", prev.g1),
                     g2=_num(sub, "g2", f"{path}.tthg", "phase_model.tthg.g2", prev.g2),
                     w=_num(sub, "w", f"{path}.tthg", "phase_model.tthg.w", prev.w))
    sub = d["hgd"]
    _check_dict(sub, f"{path}.hgd", {"d"})
    prev = base if isinstance(base, HgdModel) else HgdModel()
    return _wrap(f"{path}.hgd", HgdModel,
                 d=_num(sub, "d", f"{path}.hgd", "phase_model.hgd.d", prev.d))


def _build_march(d: dict, path: str, base: MarchParams) -> MarchParams:
    keys = {"view_samples_base", "view_scale", "shadow_samples_base", "shadow_scale",
            "transmittance_threshold"}
    _check_dict(d, path, keys)
    kwargs = {}
    for name in keys:
        integer = name.endswith("_base")
        kwargs[name] = _num(d, name, path, f"march_params.{name}",
                            getattr(base, name), integer=integer)
    return _wrap(path, MarchParams, **kwargs)


def _build_textures(d: dict, path: str, base: TextureRefs) -> TextureRefs:
    _check_dict(d, path, {"base", "erosion"})
    refs = {}
    for key in ("base", "erosion"):
        v = d.get(key, getattr(base, key))
        if not isinstance(v, str) or not v:
            _fail(f"{path}.{key}", f"expected a texture reference string, got {v!r}")
        if v.startswith("procedural:"):
            _wrap(f"{path}.{key}", parse_texture_ref, v, 0)
        refs[key] = v
    return TextureRefs(**refs)


_SCENE_KEYS = {"camera", "sun", "layer", "cloud_params", "phase_model", "march_params",
               "textures", "albedo", "ambient_strength", "exposure", "seed", "time_s"}


def config_from_dict(data: dict, base: Optional[SceneConfig] = None,
                     path: str = "") -> SceneConfig:
    """Build a SceneConfig from a (possibly partial) dict of overrides."""
    base = base or SceneConfig()
    _check_dict(data, path, _SCENE_KEYS)

    def sub(key):
        return f"{path}.{key}" if path else key

    seed = data.get("seed", base.seed)
    if isinstance(seed, bool) or not isinstance(seed, int):
        _fail(sub("seed"), f"expected an integer, got {seed!r}")

    return SceneConfig(
        camera=_build_camera(data.get("camera", {}), sub("camera"), base.camera),
        sun=_build_sun(data.get("sun", {}), sub("sun"), base.sun),
        layer=_build_layer(data.get("layer", {}), sub("layer"), base.layer),
        cloud_params=_build_cloud(data.get("cloud_params", {}), sub("cloud_params"),
                                  base.cloud_params),
        phase_model=_build_phase(data.get("phase_model", {}), sub("phase_model"),
                                 base.phase_model),
        march_params=_build_march(data.get("march_params", {}), sub("march_params"),
                                  base.march_params),
        textures=_build_textures(data.get("textures", {}), sub("textures"), base.textures),
        albedo=_num(data, "albedo", path, "albedo", base.albedo),
        ambient_strength=_num(data, "ambient_strength", path, "ambient_strength",
                              base.ambient_strength),
        exposure=_num(data, "exposure", path, "exposure", base.exposure),
        seed=seed,
        time_s=_num(data, "time_s", path, "time_s", base.time_s),
    )


def load_config(src: Union[str, bytes, dict]) -> SceneConfig:
    """Load and validate a scene; absent fields fall back to the defaults.

    src is a filesystem path, raw JSON bytes, or an already-parsed dict.
    """
    if isinstance(src, dict):
        data = src
    else:
        if isinstance(src, (bytes, bytearray)):
            text = bytes(src).decode("utf-8")
        else:
            with open(src) as f:
                text = f.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"config parse error at line {exc.lineno} column {exc.colno}: "
                              f"{exc.msg}") from exc
    if not isinstance(data, dict):
        raise FormatError("config root must be a JSON object")
    return config_from_dict(data)


def scene_to_dict(scene: SceneConfig) -> dict:
    """Canonical full serialization; load(scene_to_dict(s)) == s."""
    phase: dict
    if isinstance(scene.phase_model, TthgModel):
        phase = {"tthg": {"g1": scene.phase_model.g1, "g2": scene.phase_model.g2,
                          "w": scene.phase_model.w}}
    else:
        phase = {"hgd": {"d": scene.phase_model.d}}
    return {
        "camera": {
            "position": list(scene.camera.position),
            "forward": list(scene.camera.forward),
            "up": list(scene.camera.up),
            "vfov_deg": scene.camera.vfov_deg,
            "resolution": list(scene.camera.resolution),
        },
        "sun": {
            "direction": list(scene.sun.direction),
            "irradiance": list(scene.sun.irradiance),
        },
        "layer": {
            "geometry": scene.layer.geometry,
            "bottom_altitude_km": scene.layer.bottom_altitude_km,
            "thickness_km": scene.layer.thickness_km,
            "planet_radius_km": scene.layer.planet_radius_km,
        },
        "cloud_params": {
            "method": scene.cloud_params.method,
            "P3": scene.cloud_params.P3,
            "P4": scene.cloud_params.P4,
            "C_type": scene.cloud_params.C_type,
            "C_wispy": scene.cloud_params.C_wispy,
            "C_billowy": scene.cloud_params.C_billowy,
            "b_tiling_km": scene.cloud_params.b_tiling_km,
            "e_tiling_km": scene.cloud_params.e_tiling_km,
            "base_noise_frequency": scene.cloud_params.base_noise_frequency,
            "erosion_noise_frequency": scene.cloud_params.erosion_noise_frequency,
            "erosion_strength": scene.cloud_params.erosion_strength,
            "wind_kmps": list(scene.cloud_params.wind_kmps),
            "erosion_motion_scale": scene.cloud_params.erosion_motion_scale,
            "sigma_max": scene.cloud_params.sigma_max,
        },
        "phase_model": phase,
        "march_params": {
            "view_samples_base": scene.march_params.view_samples_base,
            "view_scale": scene.march_params.view_scale,
            "shadow_samples_base": scene.march_params.shadow_samples_base,
            "shadow_scale": scene.march_params.shadow_scale,
            "transmittance_threshold": scene.march_params.transmittance_threshold,
        },
        "textures": {"base": scene.textures.base, "erosion": scene.textures.erosion},
        "albedo": scene.albedo,
        "ambient_strength": scene.ambient_strength,
        "exposure": scene.exposure,
        "seed": scene.seed,
        "time_s": scene.time_s,
    }


def save_config(scene: SceneConfig, path: str) -> None:
    with open(path, "w") as f:
        json.dump(scene_to_dict(scene), f, indent=2)
        f.write("\n")


def _schema_number(bounds_key: str, integer: bool = False) -> dict:
    b = BOUNDS[bounds_key]
    out = {"type": "integer" if integer else "number", "minimum": b["min"]}
    if b.get("max_exclusive"):
        out["exclusiveMaximum"] = b["max"]
    else:
        out["maximum"] = b["max"]
    return out


def _schema_vec(n: int, item: Optional[dict] = None) -> dict:
    return {"type": "array", "items": item or {"type": "number"},
            "minItems": n, "maxItems": n}


def scene_schema() -> dict:
    """JSON Schema for the scene document accepted by load_config.

    Built from the same BOUNDS table and key sets the validator uses, so
    the published document cannot drift from the code. Partial documents
    are valid (absent fields fall back to defaults); unknown keys are not.
    """
    cloud_props = {"method": {"enum": sorted(FIELD_METHODS)},
                   "wind_kmps": _schema_vec(3)}
    for name in ("P3", "P4", "C_type", "C_wispy", "C_billowy", "b_tiling_km",
                 "e_tiling_km", "base_noise_frequency", "erosion_noise_frequency",
                 "erosion_strength", "erosion_motion_scale", "sigma_max"):
        cloud_props[name] = _schema_number(f"cloud_params.{name}")
    march_props = {
        name: _schema_number(f"march_params.{name}", integer=name.endswith("_base"))
        for name in ("view_samples_base", "view_scale", "shadow_samples_base",
                     "shadow_scale", "transmittance_threshold")}
    texture_ref = {"type": "string", "minLength": 1}
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "SceneConfig",
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "camera": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "position": _schema_vec(3),
                    "forward": _schema_vec(3),
                    "up": _schema_vec(3),
                    "vfov_deg": _schema_number("camera.vfov_deg"),
                    "resolution": _schema_vec(2, {"type": "integer", "minimum": 1}),
                },
            },
            "sun": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "direction": _schema_vec(3),
                    "elevation_deg": _schema_number("sun.elevation_deg"),
                    "azimuth_deg": _schema_number("sun.azimuth_deg"),
                    "irradiance": _schema_vec(3, {"type": "number", "minimum": 0}),
                },
                # direction and angles are alternative parameterizations
                "not": {
                    "required": ["direction"],
                    "anyOf": [{"required": ["elevation_deg"]},
                              {"required": ["azimuth_deg"]}],
                },
            },
            "layer": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "geometry": {"enum": sorted(LAYER_GEOMETRIES)},
                    "bottom_altitude_km": _schema_number("layer.bottom_altitude_km"),
                    "thickness_km": _schema_number("layer.thickness_km"),
                    "planet_radius_km": _schema_number("layer.planet_radius_km"),
                },
            },
            "cloud_params": {
                "type": "object",
                "additionalProperties": False,
                "properties": cloud_props,
            },
            "phase_model": {
                "type": "object",
                "additionalProperties": False,
                "maxProperties": 1,
                "properties": {
                    "tthg": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "g1": _schema_number("phase_model.tthg.g1"),
                            "g2": _schema_number("phase_model.tthg.g2"),
                            "w": _schema_number("phase_model.tthg.w"),
                        },
                    },
                    "hgd": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {"d": _schema_number("phase_model.hgd.d")},
                    },
                },
            },
            "march_params": {
                "type": "object",
                "additionalProperties": False,
                "properties": march_props,
            },
            "textures": {
                "type": "object",
                "additionalProperties": False,
                "properties": {"base": texture_ref, "erosion": texture_ref},
            },
            "albedo": _schema_number("albedo"),
            "ambient_strength": _schema_number("ambient_strength"),
            "exposure": _schema_number("exposure"),
            "seed": {"type": "integer"},
            "time_s": _schema_number("time_s"),
        },
    }


def parse_texture_ref(ref: str, default_seed: int) -> Tuple[str, int, int]:
    """Parse "procedural:<kind>[?dims=N&seed=K]" into (kind, dims, seed)."""
    body = ref[len("procedural:"):]
    kind, _, query = body.partition("?")
    if kind not in PROCEDURAL_KINDS:
        raise ParameterError(
            f"unknown procedural texture kind {kind!r}; expected one of {PROCEDURAL_KINDS}")
    dims = DEFAULT_TEXTURE_DIMS
    seed = default_seed
    if query:
        q = parse_qs(query, strict_parsing=True)
        for key, vals in q.items():
            if key not in ("dims", "seed"):
                raise ParameterError(f"unknown texture ref option {key!r} in {ref!r}")
            try:
                val = int(vals[-1])
            except ValueError:
                raise ParameterError(f"texture ref option {key}={vals[-1]!r} is not an integer")
            if key == "dims":
                if not 2 <= val <= 512:
                    raise ParameterError(f"texture dims must be in [2, 512], got {val}")
                dims = val
            else:
                seed = val
    return kind, dims, seed


_texture_cache: dict = {}
_texture_lock = threading.Lock()


def resolve_textures(scene: SceneConfig) -> TextureSet:
    """Materialize the scene's texture references, caching procedural bakes.

    Procedural refs default to 128-cube volumes seeded from the scene seed
    (erosion uses seed + 1 so the two fields decorrelate).
    """
    from .noise import bake_volume, curly_alligator, perlin_worley_base
    from .volume import load_volume

    generators = {"perlin_worley": perlin_worley_base, "curly_alligator": curly_alligator}
    out = {}
    for role, ref, default_seed in (("base", scene.textures.base, scene.seed),
                                    ("erosion", scene.textures.erosion, scene.seed + 1)):
        if ref.startswith("procedural:"):
            kind, dims, seed = parse_texture_ref(ref, default_seed)
            key = (kind, dims, seed)
            with _texture_lock:
                tex = _texture_cache.get(key)
            if tex is None:
                tex = bake_volume(generators[kind], dims, seed, color_id=role)
                with _texture_lock:
                    _texture_cache[key] = tex
        else:
            tex = load_volume(ref)
        out[role] = tex
    return TextureSet(base=out["base"], erosion=out["erosion"])
