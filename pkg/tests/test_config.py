"""Scene configuration: defaults, validation diagnostics, serialization."""

import json

import numpy as np
import pytest

from cloudmarch.config import (BOUNDS, SceneConfig, config_from_dict,
                               load_config, parse_texture_ref, resolve_textures,
                               save_config, scene_to_dict)
from cloudmarch.errors import FormatError, ParameterError
from cloudmarch.noise import bake_volume, perlin_worley_base
from cloudmarch.optics import HgdModel, TthgModel
from cloudmarch.volume import save_volume


class TestDefaults:
    def test_empty_config_is_default_scene(self):
        assert load_config({}) == SceneConfig()

    def test_default_phase_is_two_term_hg(self):
        scene = SceneConfig()
        assert scene.phase_model == TthgModel(g1=0.85, g2=-0.3, w=0.7)

    def test_partial_override_keeps_other_defaults(self):
        scene = load_config({"cloud_params": {"P4": 1.2}})
        assert scene.cloud_params.P4 == 1.2
        assert scene.cloud_params.sigma_max == SceneConfig().cloud_params.sigma_max
        assert scene.camera == SceneConfig().camera


class TestValidationDiagnostics:
    def test_unknown_key_names_path(self):
        with pytest.raises(ParameterError, match=r"cloud_params.*P9"):
            load_config({"cloud_params": {"P9": 1.0}})

    def test_unknown_top_level_key(self):
        with pytest.raises(ParameterError, match="fog"):
            load_config({"fog": {}})

    @pytest.mark.parametrize("overrides, fragment", [
        ({"cloud_params": {"P4": 2.0}}, "cloud_params.P4"),
        ({"albedo": 1.5}, "albedo"),
        ({"camera": {"vfov_deg": 179.0}}, "vfov_deg"),
        ({"march_params": {"transmittance_threshold": 0.5}}, "transmittance_threshold"),
        ({"layer": {"bottom_altitude_km": -1.0}}, "bottom_altitude_km"),
        ({"sun": {"elevation_deg": 95.0}}, "elevation_deg"),
    ])
    def test_out_of_bounds_names_field(self, overrides, fragment):
        with pytest.raises(ParameterError, match=fragment):
            load_config(overrides)

    def test_non_numeric_value(self):
        with pytest.raises(ParameterError, match="exposure"):
            load_config({"exposure": "bright"})

    def test_integer_fields_reject_fractions(self):
        with pytest.raises(ParameterError, match="view_samples_base"):
            load_config({"march_params": {"view_samples_base": 100.5}})

    @pytest.mark.parametrize("seed", [1.5, True, "seven"])
    def test_seed_must_be_integer(self, seed):
        with pytest.raises(ParameterError, match="seed"):
            load_config({"seed": seed})

    def test_bounds_cover_every_numeric_path(self):
        for key, rng in BOUNDS.items():
            assert rng["min"] <= rng["max"], key


class TestSunSection:
    def test_angles_build_direction(self):
        scene = load_config({"sun": {"elevation_deg": 45.0, "azimuth_deg": 0.0}})
        assert scene.sun.direction[2] == pytest.approx(np.sin(np.radians(45.0)))

    def test_direction_and_angles_are_exclusive(self):
        with pytest.raises(ParameterError, match="not both"):
            load_config({"sun": {"direction": [0, 0, 1], "elevation_deg": 30.0}})

    def test_irradiance_only_keeps_direction(self):
        scene = load_config({"sun": {"irradiance": [5.0, 5.0, 5.0]}})
        assert scene.sun.direction == SceneConfig().sun.direction
        assert scene.sun.irradiance == (5.0, 5.0, 5.0)


class TestPhaseSection:
    def test_requires_exactly_one_family(self):
        with pytest.raises(ParameterError, match="exactly one"):
            load_config({"phase_model": {"tthg": {}, "hgd": {}}})

    def test_partial_tthg_merges_with_defaults(self):
        scene = load_config({"phase_model": {"tthg": {"g1": 0.6}}})
        assert scene.phase_model == TthgModel(g1=0.6, g2=-0.3, w=0.7)

    def test_switching_family_uses_family_defaults(self):
        scene = load_config({"phase_model": {"hgd": {}}})
        assert scene.phase_model == HgdModel(d=4.5)
        scene = load_config({"phase_model": {"hgd": {"d": 0.8}}})
        assert scene.phase_model == HgdModel(d=0.8)

    def test_droplet_diameter_bounds(self):
        with pytest.raises(ParameterError, match=r"phase_model.hgd.d"):
            load_config({"phase_model": {"hgd": {"d": 60.0}}})


class TestRoundTrip:
    OVERRIDES = {
        "camera": {"position": [1.0, -2.0, 0.5], "vfov_deg": 40.0,
                   "resolution": [96, 54]},
        "sun": {"elevation_deg": 12.0, "azimuth_deg": -30.0},
        "layer": {"geometry": "spherical_shell", "bottom_altitude_km": 2.0},
        "cloud_params": {"method": "coverage_carve", "P4": 1.1, "sigma_max": 12.0},
        "phase_model": {"hgd": {"d": 2.5}},
        "march_params": {"view_scale": 1.0, "shadow_scale": 1.0},
        "albedo": 0.9,
        "seed": 42,
    }

    def test_dict_round_trip_is_fixed_point(self):
        scene = load_config(self.OVERRIDES)
        blob = scene_to_dict(scene)
        again = load_config(blob)
        assert again == scene
        assert scene_to_dict(again) == blob

    def test_file_round_trip(self, tmp_path):
        scene = load_config(self.OVERRIDES)
        path = str(tmp_path / "scene.json")
        save_config(scene, path)
        assert load_config(path) == scene

    def test_serialized_sun_uses_direction(self):
        blob = scene_to_dict(load_config({"sun": {"elevation_deg": 30.0}}))
        assert "direction" in blob["sun"]
        assert "elevation_deg" not in blob["sun"]

    def test_bytes_source(self):
        raw = json.dumps({"albedo": 0.8}).encode()
        assert load_config(raw).albedo == 0.8


class TestParseErrors:
    def test_malformed_json_reports_position(self):
        with pytest.raises(FormatError, match=r"line \d+ column \d+"):
            load_config(b'{"albedo": 0.9,,}')

    def test_non_object_root(self):
        with pytest.raises(FormatError, match="object"):
            load_config(b"[1, 2, 3]")

    def test_missing_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            load_config(str(tmp_path / "absent.json"))


class TestTextureRefs:
    def test_defaults(self):
        kind, dims, seed = parse_texture_ref("procedural:perlin_worley", 7)
        assert (kind, dims, seed) == ("perlin_worley", 128, 7)

    def test_query_options(self):
        kind, dims, seed = parse_texture_ref(
            "procedural:curly_alligator?dims=64&seed=3", 7)
        assert (kind, dims, seed) == ("curly_alligator", 64, 3)

    @pytest.mark.parametrize("ref", [
        "procedural:simplex",
        "procedural:perlin_worley?dims=1",
        "procedural:perlin_worley?dims=1024",
        "procedural:perlin_worley?dims=abc",
        "procedural:perlin_worley?smoothing=2",
    ])
    def test_rejects_bad_refs(self, ref):
        with pytest.raises(ParameterError):
            parse_texture_ref(ref, 0)

    def test_config_validates_refs_eagerly(self):
        with pytest.raises(ParameterError, match="textures"):
            load_config({"textures": {"base": "procedural:nope"}})


class TestResolveTextures:
    def test_procedural_dims_and_cache(self):
        scene = load_config({"textures": {
            "base": "procedural:perlin_worley?dims=8&seed=100",
            "erosion": "procedural:curly_alligator?dims=8&seed=101",
        }})
        first = resolve_textures(scene)
        assert first.base.dims == (8, 8, 8)
        second = resolve_textures(scene)
        assert second.base is first.base
        assert second.erosion is first.erosion

    def test_erosion_seed_decorrelates_by_default(self):
        scene = load_config({"seed": 200, "textures": {
            "base": "procedural:perlin_worley?dims=8",
            "erosion": "procedural:perlin_worley?dims=8",
        }})
        out = resolve_textures(scene)
        assert not np.array_equal(out.base.voxels, out.erosion.voxels)

    def test_file_reference(self, tmp_path):
        tex = bake_volume(perlin_worley_base, (4, 4, 4), seed=5)
        header = save_volume(tex, str(tmp_path / "vol"), fmt="raw")
        scene = load_config({"textures": {
            "base": header,
            "erosion": "procedural:curly_alligator?dims=8&seed=101",
        }})
        out = resolve_textures(scene)
        np.testing.assert_array_equal(out.base.voxels, tex.voxels)


class TestConfigFromDictPathPrefix:
    def test_nested_path_in_messages(self):
        with pytest.raises(ParameterError, match=r"runs\[0\]\.cloud_params"):
            config_from_dict({"cloud_params": {"P4": 9.0}}, path="runs[0]")
