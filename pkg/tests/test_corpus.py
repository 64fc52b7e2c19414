"""Regression corpus generator: splits, determinism, scene diversity."""

import json
from pathlib import Path

import pytest

from cloudmarch.config import load_config
from cloudmarch.corpus import CLOUD_TYPE_RANGES, generate_corpus
from cloudmarch.errors import ParameterError


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    manifest = generate_corpus(str(out), count=24, split=0.5,
                               resolution=(64, 64), seed=9)
    return out, manifest


class TestManifest:
    def test_counts_and_split(self, small_corpus):
        _, manifest = small_corpus
        assert manifest["count"] == 24
        assert manifest["train_count"] == 12
        assert manifest["test_count"] == 12
        splits = [s["split"] for s in manifest["scenes"]]
        assert splits.count("train") == 12
        assert splits.count("test") == 12

    def test_entries_carry_grouping_metadata(self, small_corpus):
        _, manifest = small_corpus
        for entry in manifest["scenes"]:
            assert set(entry) == {"id", "file", "split", "cloud_type", "light",
                                  "density", "altitude_km", "phase", "seed"}
            assert entry["cloud_type"] in CLOUD_TYPE_RANGES
            assert entry["phase"] in ("tthg", "hgd")
            assert -10.0 <= entry["light"]["elevation_deg"] <= 90.0
            assert entry["density"]["sigma_max"] > 0.0

    def test_manifest_written_to_disk(self, small_corpus):
        out, manifest = small_corpus
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == manifest


class TestScenes:
    def test_every_scene_file_loads(self, small_corpus):
        out, manifest = small_corpus
        for entry in manifest["scenes"]:
            scene = load_config(str(out / entry["file"]))
            assert scene.camera.resolution == (64, 64)

    def test_metadata_matches_scene_contents(self, small_corpus):
        out, manifest = small_corpus
        for entry in manifest["scenes"][:6]:
            scene = load_config(str(out / entry["file"]))
            assert scene.cloud_params.sigma_max == pytest.approx(
                entry["density"]["sigma_max"])
            assert scene.sun.elevation_deg == pytest.approx(
                entry["light"]["elevation_deg"], abs=1e-6)
            assert scene.layer.bottom_altitude_km == pytest.approx(
                entry["altitude_km"]["bottom"])

    def test_covers_all_types_and_phase_families(self, small_corpus):
        _, manifest = small_corpus
        assert {s["cloud_type"] for s in manifest["scenes"]} == set(CLOUD_TYPE_RANGES)
        assert {s["phase"] for s in manifest["scenes"]} == {"tthg", "hgd"}

    def test_type_ranges_respected(self, small_corpus):
        out, manifest = small_corpus
        for entry in manifest["scenes"]:
            rng = CLOUD_TYPE_RANGES[entry["cloud_type"]]
            lo, hi = rng["bottom_km"]
            assert lo <= entry["altitude_km"]["bottom"] <= hi
            lo, hi = rng["sigma_max"]
            assert lo <= entry["density"]["sigma_max"] <= hi


class TestDeterminism:
    def test_same_seed_reproduces_corpus_bytes(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_corpus(str(a), count=10, split=0.7, seed=4)
        generate_corpus(str(b), count=10, split=0.7, seed=4)
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
        for path in sorted((a / "scenes").iterdir()):
            twin = b / "scenes" / path.name
            assert path.read_bytes() == twin.read_bytes()

    def test_different_seed_changes_scenes(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_corpus(str(a), count=10, seed=1)
        generate_corpus(str(b), count=10, seed=2)
        assert (a / "manifest.json").read_bytes() != (b / "manifest.json").read_bytes()

    def test_rounded_split_counts(self, tmp_path):
        manifest = generate_corpus(str(tmp_path / "c"), count=21, split=0.7, seed=0)
        assert manifest["train_count"] == 15
        assert manifest["test_count"] == 6


class TestValidation:
    @pytest.mark.parametrize("kwargs", [
        {"count": 0},
        {"split": -0.1},
        {"split": 1.5},
        {"resolution": (0, 64)},
    ])
    def test_rejects_bad_arguments(self, tmp_path, kwargs):
        with pytest.raises(ParameterError):
            generate_corpus(str(tmp_path / "x"), **kwargs)
