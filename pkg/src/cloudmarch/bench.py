"""Benchmark harness: timed repeat renders with instrumented sample counts.

Wall times are reported for context but only the deterministic extinction
sample counters are meant for assertions; timings vary with the host while
counters are bit-stable for a fixed scene.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from .config import SceneConfig
from .errors import ParameterError
from .march import render

#: Required shape of the JSON report, published for downstream tooling.
BENCH_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "BenchReport",
    "type": "object",
    "additionalProperties": False,
    "required": ["resolution", "frames_per_run", "runs"],
    "properties": {
        "resolution": {
            "type": "array", "items": {"type": "integer", "minimum": 1},
            "minItems": 2, "maxItems": 2,
        },
        "frames_per_run": {"type": "integer", "minimum": 3},
        "runs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["label", "view_scale", "shadow_scale", "mean_ms",
                             "p50_ms", "p95_ms", "frames", "extinction_samples",
                             "view_samples", "shadow_samples"],
                "properties": {
                    "label": {"type": "string"},
                    "view_scale": {"type": "number", "exclusiveMinimum": 0},
                    "shadow_scale": {"type": "number", "exclusiveMinimum": 0},
                    "mean_ms": {"type": "number", "minimum": 0},
                    "p50_ms": {"type": "number", "minimum": 0},
                    "p95_ms": {"type": "number", "minimum": 0},
                    "frames": {"type": "integer", "minimum": 3},
                    "extinction_samples": {"type": "integer", "minimum": 0},
                    "view_samples": {"type": "integer", "minimum": 0},
                    "shadow_samples": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class BenchRun:
    """Timing and counters for one (view_scale, shadow_scale) setting."""

    label: str
    view_scale: float
    shadow_scale: float
    mean_ms: float
    p50_ms: float
    p95_ms: float
    frames: int
    extinction_samples: int
    view_samples: int
    shadow_samples: int


@dataclass(frozen=True)
class BenchReport:
    resolution: Tuple[int, int]
    frames_per_run: int
    runs: Tuple[BenchRun, ...]

    def to_dict(self) -> dict:
        return {
            "resolution": list(self.resolution),
            "frames_per_run": self.frames_per_run,
            "runs": [{
                "label": r.label,
                "view_scale": r.view_scale,
                "shadow_scale": r.shadow_scale,
                "mean_ms": r.mean_ms,
                "p50_ms": r.p50_ms,
                "p95_ms": r.p95_ms,
                "frames": r.frames,
                "extinction_samples": r.extinction_samples,
                "view_samples": r.view_samples,
                "shadow_samples": r.shadow_samples,
            } for r in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        """Fixed-width text table of all runs."""
        head = (f"{'run':<22} {'vscale':>6} {'sscale':>6} {'mean ms':>9} "
                f"{'p50 ms':>9} {'p95 ms':>9} {'ext samples':>12}")
        lines = [head, "-" * len(head)]
        for r in self.runs:
            lines.append(f"{r.label:<22} {r.view_scale:>6.2f} {r.shadow_scale:>6.2f} "
                         f"{r.mean_ms:>9.1f} {r.p50_ms:>9.1f} {r.p95_ms:>9.1f} "
                         f"{r.extinction_samples:>12d}")
        return "\n".join(lines) + "\n"


def run_bench(scene: SceneConfig, frames: int = 4,
              scales: Sequence[Tuple[float, float]] = ((4.0, 4.0), (2.0, 2.0)),
              textures=None) -> BenchReport:
    """Render the scene repeatedly at each scale pair and collect stats.

    The first frame of every run is a warm-up and is excluded from the
    timing statistics, so frames must be at least 4 to leave three timed
    frames. Sample counters are taken from the final frame; they are
    identical across frames of a run.

    Parameters
    ----------
    scene : SceneConfig
        Base scene; march sample scales are overridden per run.
    frames : int
        Renders per scale pair, warm-up included.
    scales : sequence of (view_scale, shadow_scale)
        One benchmark run per pair.
    textures : TextureSet, optional
        Pre-resolved textures, to keep bake time out of the loop.
    """
    if frames < 4:
        raise ParameterError(f"frames must be >= 4 (first is warm-up), got {frames}")
    if not scales:
        raise ParameterError("scales must name at least one (view, shadow) pair")
    runs: List[BenchRun] = []
    for view_scale, shadow_scale in scales:
        sc = replace(scene, march_params=replace(
            scene.march_params, view_scale=view_scale, shadow_scale=shadow_scale))
        times_ms = []
        img = None
        for _ in range(frames):
            t0 = time.perf_counter()
            img = render(sc, textures=textures)
            times_ms.append((time.perf_counter() - t0) * 1e3)
        timed = np.asarray(times_ms[1:])
        stats = img.stats
        runs.append(BenchRun(
            label=f"view{view_scale:g}_shadow{shadow_scale:g}",
            view_scale=view_scale,
            shadow_scale=shadow_scale,
            mean_ms=float(timed.mean()),
            p50_ms=float(np.percentile(timed, 50)),
            p95_ms=float(np.percentile(timed, 95)),
            frames=len(timed),
            extinction_samples=stats.extinction_samples,
            view_samples=stats.view_samples,
            shadow_samples=stats.shadow_samples,
        ))
    return BenchReport(resolution=scene.camera.resolution,
                       frames_per_run=frames - 1,
                       runs=tuple(runs))
