"""Command-line interface: exit codes, outputs, parity with the service."""

import json

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from cloudmarch.bench import BENCH_SCHEMA
from cloudmarch.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from cloudmarch.march import read_hdr
from cloudmarch.service import create_app

pytestmark = pytest.mark.usefixtures("default_textures")


def _png_size(path) -> tuple:
    with Image.open(path) as im:
        return im.size


class TestRenderCommand:
    def test_preset_render_writes_png(self, tmp_path, capsys):
        out = tmp_path / "frame.png"
        code = main(["render", "--preset", "default", "--out", str(out),
                     "--width", "24", "--height", "14"])
        assert code == EXIT_OK
        assert _png_size(out) == (24, 14)
        assert "extinction samples" in capsys.readouterr().err

    def test_scene_file_render(self, tmp_path):
        scene = tmp_path / "scene.json"
        scene.write_text(json.dumps({
            "camera": {"resolution": [16, 10]},
            "cloud_params": {"P4": 0.0},
        }))
        out = tmp_path / "sky.png"
        assert main(["render", "--scene", str(scene), "--out", str(out)]) == EXIT_OK
        assert _png_size(out) == (16, 10)

    def test_hdr_flag_writes_readable_dump(self, tmp_path):
        out = tmp_path / "frame.png"
        code = main(["render", "--preset", "default", "--out", str(out),
                     "--width", "16", "--height", "9", "--hdr"])
        assert code == EXIT_OK
        hdr = read_hdr(str(tmp_path / "frame.hdr"))
        assert (hdr.width, hdr.height) == (16, 9)

    def test_sweep_preset_writes_indexed_outputs(self, tmp_path):
        out = tmp_path / "sweep.png"
        code = main(["render", "--preset", "fig3_sweep", "--out", str(out),
                     "--width", "12", "--height", "8"])
        assert code == EXIT_OK
        for i in range(3):
            assert (tmp_path / f"sweep_{i}.png").exists()
        # Sweeps of three do not emit a pair disparity.
        assert not (tmp_path / "sweep_diff.png").exists()

    def test_diff_of_identical_dumps_is_black(self, tmp_path):
        out = tmp_path / "frame.png"
        main(["render", "--preset", "default", "--out", str(out),
              "--width", "12", "--height", "8", "--hdr"])
        hdr = str(tmp_path / "frame.hdr")
        diff_png = tmp_path / "diff.png"
        code = main(["render", "--diff", hdr, hdr, "--out", str(diff_png)])
        assert code == EXIT_OK
        assert np.all(np.asarray(Image.open(diff_png)) == 0)

    def test_missing_scene_file_is_io_error(self, tmp_path, capsys):
        code = main(["render", "--scene", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "x.png")])
        assert code == EXIT_IO
        assert "i/o error" in capsys.readouterr().err

    def test_invalid_scene_is_config_error(self, tmp_path, capsys):
        scene = tmp_path / "bad.json"
        scene.write_text(json.dumps({"cloud_params": {"P4": 9.0}}))
        code = main(["render", "--scene", str(scene), "--out", str(tmp_path / "x.png")])
        assert code == EXIT_CONFIG
        assert "cloud_params.P4" in capsys.readouterr().err

    def test_malformed_json_is_config_error(self, tmp_path):
        scene = tmp_path / "bad.json"
        scene.write_text("{not json")
        assert main(["render", "--scene", str(scene),
                     "--out", str(tmp_path / "x.png")]) == EXIT_CONFIG

    def test_unknown_preset_is_config_error(self, tmp_path, capsys):
        code = main(["render", "--preset", "nope", "--out", str(tmp_path / "x.png")])
        assert code == EXIT_CONFIG
        assert "unknown preset" in capsys.readouterr().err


class TestBenchCommand:
    def test_report_matches_schema(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = main(["bench", "--preset", "default", "--width", "16",
                     "--height", "9", "--frames", "4", "--scales", "1,1", "0.5,0.5",
                     "--out", str(report_path)])
        assert code == EXIT_OK
        report = json.loads(report_path.read_text())
        jsonschema.validate(report, BENCH_SCHEMA)
        assert [r["label"] for r in report["runs"]] == \
            ["view1_shadow1", "view0.5_shadow0.5"]
        out = capsys.readouterr().out
        assert "ext samples" in out

    def test_bad_scale_pair_is_config_error(self, tmp_path):
        assert main(["bench", "--preset", "default", "--scales", "1,2,3",
                     "--out", str(tmp_path / "r.json")]) == EXIT_CONFIG


class TestCorpusCommand:
    def test_generates_manifest(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        code = main(["corpus", "--out", str(out), "--count", "9",
                     "--split", "0.5", "--resolution", "64x64", "--seed", "3"])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["count"] == 9
        assert "train/test" in capsys.readouterr().err

    def test_bad_resolution_is_config_error(self, tmp_path):
        assert main(["corpus", "--out", str(tmp_path / "c"),
                     "--count", "4", "--resolution", "64y64"]) == EXIT_CONFIG


class TestServiceParity:
    def test_cli_and_api_produce_identical_pngs(self, tmp_path):
        overrides = {"camera": {"resolution": [20, 12]},
                     "cloud_params": {"P4": 0.9}}
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps(overrides))
        out = tmp_path / "cli.png"
        assert main(["render", "--scene", str(scene_path),
                     "--out", str(out)]) == EXIT_OK

        client = TestClient(create_app())
        resp = client.post("/render", json=overrides)
        assert resp.status_code == 200
        assert resp.content == out.read_bytes()
