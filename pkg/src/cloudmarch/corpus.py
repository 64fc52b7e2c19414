"""Seeded regression-corpus generator.

Emits a directory of scene configs spanning three cloud-type analogs
(cirrus, cumulus, stratocumulus), a range of sun angles, and both phase
models, plus a manifest recording per-scene metadata and a train/test
split assignment. The corpus is a rendering regression suite: re-render
any subset and compare against stored outputs.
"""

from __future__ import annotations

import json
import os
from dataclasses import replace
from typing import Tuple

import numpy as np

from .config import SceneConfig, TextureRefs, save_config
from .errors import ParameterError
from .field import CloudLayer
from .march import Sun
from .optics import HgdModel, TthgModel

#: Per-type sampling ranges: altitude band, optical thickness, profile and
#: coverage habits, and droplet sizes for the hgd phase model. Chosen to
#: caricature the named cloud families, not to be meteorology.
CLOUD_TYPE_RANGES = {
    "cirrus": {
        "bottom_km": (6.0, 9.0), "thickness_km": (0.3, 1.0),
        "sigma_max": (1.0, 6.0), "C_type": (0.0, 0.25),
        "C_wispy": (0.6, 0.95), "P4": (0.3, 0.7), "d": (10.0, 40.0),
    },
    "cumulus": {
        "bottom_km": (0.8, 2.0), "thickness_km": (2.0, 5.0),
        "sigma_max": (20.0, 60.0), "C_type": (0.65, 1.0),
        "C_wispy": (0.1, 0.4), "P4": (0.5, 1.0), "d": (2.0, 8.0),
    },
    "stratocumulus": {
        "bottom_km": (1.0, 2.5), "thickness_km": (0.8, 2.0),
        "sigma_max": (8.0, 25.0), "C_type": (0.3, 0.6),
        "C_wispy": (0.2, 0.6), "P4": (0.7, 1.2), "d": (5.0, 15.0),
    },
}

CLOUD_TYPES = tuple(CLOUD_TYPE_RANGES)

#: Corpus scenes bake smaller noise volumes than the interactive default so
#: a full regression sweep stays tractable.
CORPUS_TEXTURE_DIMS = 64


def _u(rng: np.random.Generator, lo_hi: Tuple[float, float], nd: int = 4) -> float:
    lo, hi = lo_hi
    return round(float(rng.uniform(lo, hi)), nd)


def _scene_for(rng: np.random.Generator, index: int,
               resolution: Tuple[int, int]) -> Tuple[SceneConfig, dict]:
    cloud_type = CLOUD_TYPES[index % len(CLOUD_TYPES)]
    r = CLOUD_TYPE_RANGES[cloud_type]
    elevation = _u(rng, (2.0, 70.0))
    azimuth = _u(rng, (0.0, 360.0))
    bottom = _u(rng, r["bottom_km"])
    thickness = _u(rng, r["thickness_km"])
    sigma = _u(rng, r["sigma_max"])
    p4 = _u(rng, r["P4"])
    c_type = _u(rng, r["C_type"])
    c_wispy = _u(rng, r["C_wispy"])
    seed = int(rng.integers(0, 2**31))

    if index % 2 == 0:
        phase = TthgModel(g1=_u(rng, (0.7, 0.9)), g2=_u(rng, (-0.5, -0.1)),
                          w=_u(rng, (0.6, 0.95)))
        phase_kind = "tthg"
    else:
        phase = HgdModel(d=_u(rng, r["d"]))
        phase_kind = "hgd"

    base = SceneConfig()
    scene = replace(
        base,
        camera=replace(base.camera, resolution=tuple(resolution)),
        sun=Sun.from_angles(elevation, azimuth),
        layer=CloudLayer(bottom_altitude_km=bottom, thickness_km=thickness),
        cloud_params=replace(base.cloud_params, P4=p4, C_type=c_type,
                             C_wispy=c_wispy, sigma_max=sigma),
        phase_model=phase,
        textures=TextureRefs(
            base=f"procedural:perlin_worley?dims={CORPUS_TEXTURE_DIMS}",
            erosion=f"procedural:curly_alligator?dims={CORPUS_TEXTURE_DIMS}"),
        seed=seed,
    )
    meta = {
        "cloud_type": cloud_type,
        "light": {"elevation_deg": elevation, "azimuth_deg": azimuth},
        "density": {"sigma_max": sigma, "P4": p4},
        "altitude_km": {"bottom": bottom, "thickness": thickness},
        "phase": phase_kind,
        "seed": seed,
    }
    return scene, meta


def generate_corpus(out_dir: str, count: int = 500, split: float = 0.7,
                    resolution: Tuple[int, int] = (512, 512),
                    seed: int = 0) -> dict:
    """Write count scene configs plus manifest.json under out_dir.

    The train/test assignment holds exactly round(count * split) train
    scenes, chosen by a seeded permutation, so the canonical 500-scene,
    0.7-split corpus lands at 350/150. Reruns with the same arguments
    reproduce every file byte for byte.

    Returns
    -------
    dict
        The manifest that was written.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    if not 0.0 < split < 1.0:
        raise ParameterError(f"split must be inside (0, 1), got {split}")
    if len(resolution) != 2 or min(resolution) < 1:
        raise ParameterError(f"resolution must be two positive integers, got {resolution}")

    rng = np.random.default_rng(seed)
    n_train = int(round(count * split))
    order = rng.permutation(count)
    split_of = np.empty(count, dtype=object)
    split_of[order[:n_train]] = "train"
    split_of[order[n_train:]] = "test"

    scene_dir = os.path.join(out_dir, "scenes")
    os.makedirs(scene_dir, exist_ok=True)

    entries = []
    for i in range(count):
        scene, meta = _scene_for(rng, i, resolution)
        name = f"scene_{i:04d}"
        rel = os.path.join("scenes", f"{name}.json")
        save_config(scene, os.path.join(out_dir, rel))
        entries.append({"id": name, "file": rel, "split": str(split_of[i]), **meta})

    manifest = {
        "count": count,
        "split": split,
        "resolution": list(resolution),
        "seed": seed,
        "train_count": n_train,
        "test_count": count - n_train,
        "scenes": entries,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest
