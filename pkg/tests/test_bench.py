"""Benchmark harness: report schema, counters, scaling behavior."""

import json
from dataclasses import replace

import jsonschema
import pytest

from cloudmarch.bench import BENCH_SCHEMA, run_bench
from cloudmarch.config import SceneConfig
from cloudmarch.errors import ParameterError


@pytest.fixture(scope="module")
def bench_scene():
    base = SceneConfig()
    return replace(base, camera=replace(base.camera, resolution=(16, 9)))


@pytest.fixture(scope="module")
def report(bench_scene, default_textures):
    return run_bench(bench_scene, frames=4, scales=((1.0, 1.0), (0.5, 1.0)),
                     textures=default_textures)


class TestReport:
    def test_validates_against_published_schema(self, report):
        jsonschema.validate(report.to_dict(), BENCH_SCHEMA)

    def test_json_round_trips(self, report):
        assert json.loads(report.to_json()) == report.to_dict()

    def test_warmup_frame_excluded(self, report):
        assert report.frames_per_run == 3
        assert all(r.frames == 3 for r in report.runs)

    def test_labels_name_the_scales(self, report):
        assert [r.label for r in report.runs] == ["view1_shadow1", "view0.5_shadow1"]

    def test_table_lists_every_run(self, report):
        table = report.table()
        assert "ext samples" in table
        for run in report.runs:
            assert run.label in table

    def test_counter_totals_are_consistent(self, report):
        for run in report.runs:
            assert run.extinction_samples == run.view_samples + run.shadow_samples
            assert run.mean_ms > 0.0
            assert run.p95_ms >= run.p50_ms >= 0.0


class TestScaling:
    def test_view_scale_governs_view_samples(self, report):
        full, half = report.runs
        assert half.view_samples < full.view_samples
        assert half.view_samples > 0

    def test_counters_are_reproducible(self, bench_scene, default_textures):
        again = run_bench(bench_scene, frames=4, scales=((1.0, 1.0), (0.5, 1.0)),
                          textures=default_textures)
        assert [r.extinction_samples for r in again.runs] == \
            [r.extinction_samples for r in
             run_bench(bench_scene, frames=4, scales=((1.0, 1.0), (0.5, 1.0)),
                       textures=default_textures).runs]


class TestValidation:
    def test_rejects_too_few_frames(self, bench_scene):
        with pytest.raises(ParameterError, match="frames"):
            run_bench(bench_scene, frames=3)

    def test_rejects_empty_scales(self, bench_scene):
        with pytest.raises(ParameterError, match="scales"):
            run_bench(bench_scene, scales=())
