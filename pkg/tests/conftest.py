"""Shared fixtures: small baked texture sets and warm kernels.

Volume bakes and JIT compilation dominate suite runtime, so they are
session-scoped. Tests must never mutate fixture textures (voxel arrays are
read-only by construction).
"""

import pytest

from cloudmarch.field import TextureSet
from cloudmarch.noise import bake_volume, curly_alligator, perlin_worley_base


@pytest.fixture(scope="session")
def tex32() -> TextureSet:
    """32-cube texture pair, cheap enough for property sweeps."""
    base = bake_volume(perlin_worley_base, (32, 32, 32), 7, color_id="base")
    erosion = bake_volume(curly_alligator, (32, 32, 32), 8, color_id="erosion")
    return TextureSet(base=base, erosion=erosion)


@pytest.fixture(scope="session")
def default_textures() -> TextureSet:
    """The textures the default SceneConfig resolves to (cached globally)."""
    from cloudmarch.config import SceneConfig, resolve_textures

    return resolve_textures(SceneConfig())
