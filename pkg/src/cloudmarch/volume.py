"""Volume textures, trilinear wrap sampling, and the 2D atlas codec.

A volume is stored as a dense float32 array indexed [z, y, x, channel]
(x varies fastest among the spatial axes). On disk a volume is a JSON
header plus a 2D atlas image: lossless little-endian float32 raw, or 8-bit
PNG for interchange. Slices are tiled row-major across the atlas, slice k
at column k % columns, row k // columns, so a 128-cube becomes the classic
2048x1024 sheet of 16x8 slices.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from PIL import Image

from .errors import FormatError, ParameterError

#: Fractional voxel coordinates closer than this to a lattice plane snap to
#: it, making voxel-center sampling reproduce stored values exactly.
_SNAP_EPS = 1e-9

_PIL_MODES = {1: "L", 2: "LA", 3: "RGB", 4: "RGBA"}


@dataclass
class VolumeTexture:
    """Immutable dense 3D texture with 1 to 4 float32 channels."""

    dims: Tuple[int, int, int]
    channels: int
    voxels: np.ndarray
    color_id: str = "volume"

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        nx, ny, nz = self.dims
        if min(self.dims) < 1:
            raise ParameterError(f"dims must all be >= 1, got {self.dims}")
        self.voxels = np.ascontiguousarray(self.voxels, dtype=np.float32)
        expected = (nz, ny, nx, self.channels)
        if self.voxels.shape != expected:
            raise ParameterError(
                f"voxel array shape {self.voxels.shape} does not match dims {self.dims} "
                f"x {self.channels} channels (expected {expected})")
        if not 1 <= self.channels <= 4:
            raise ParameterError(f"channels must be 1..4, got {self.channels}")
        if not np.isfinite(self.voxels).all():
            raise ParameterError("volume contains non-finite values")
        self.voxels.setflags(write=False)


def sample_trilinear(tex: VolumeTexture, p) -> np.ndarray:
    """Trilinear interpolation at texture coordinate(s) p with wrap.

    p has shape (..., 3) in [0, 1) texture space (values outside wrap).
    Returns float64 of shape (..., channels). Sampling exactly at a voxel
    center ((i + 0.5) / N per axis) returns that voxel's stored value.
    """
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    nx, ny, nz = tex.dims
    dims = np.array([nx, ny, nz], dtype=np.float64)

    v = pts * dims - 0.5
    i0 = np.floor(v)
    t = v - i0
    # Snap near-lattice fractions so exact centers reproduce stored values.
    hi = t > 1.0 - _SNAP_EPS
    i0 = i0 + hi
    t = np.where(hi, 0.0, t)
    t = np.where(t < _SNAP_EPS, 0.0, t)
    i0 = i0.astype(np.int64)

    n = np.array([nx, ny, nz], dtype=np.int64)
    ix0, iy0, iz0 = (i0[:, k] % n[k] for k in range(3))
    ix1, iy1, iz1 = ((i0[:, k] + 1) % n[k] for k in range(3))
    tx, ty, tz = (t[:, k] for k in range(3))

    vox = tex.voxels
    c000 = vox[iz0, iy0, ix0].astype(np.float64)
    c100 = vox[iz0, iy0, ix1].astype(np.float64)
    c010 = vox[iz0, iy1, ix0].astype(np.float64)
    c110 = vox[iz0, iy1, ix1].astype(np.float64)
    c001 = vox[iz1, iy0, ix0].astype(np.float64)
    c101 = vox[iz1, iy0, ix1].astype(np.float64)
    c011 = vox[iz1, iy1, ix0].astype(np.float64)
    c111 = vox[iz1, iy1, ix1].astype(np.float64)

    tx = tx[:, None]
    ty = ty[:, None]
    tz = tz[:, None]
    cx00 = c000 + (c100 - c000) * tx
    cx10 = c010 + (c110 - c010) * tx
    cx01 = c001 + (c101 - c001) * tx
    cx11 = c011 + (c111 - c011) * tx
    cxy0 = cx00 + (cx10 - cx00) * ty
    cxy1 = cx01 + (cx11 - cx01) * ty
    out = cxy0 + (cxy1 - cxy0) * tz
    return out[0] if single else out


def world_to_texture(world_pos, tiling_km, motion_offset=None) -> np.ndarray:
    """Map world-space km positions onto wrapping texture coordinates.

    Returns fract((world_pos + motion_offset) / tiling_km) per axis;
    tiling_km may be a scalar or a per-axis triple.
    """
    tiling = np.asarray(tiling_km, dtype=np.float64)
    if np.any(tiling <= 0.0):
        raise ParameterError(f"tiling_km must be > 0, got {tiling_km!r}")
    pos = np.asarray(world_pos, dtype=np.float64)
    if motion_offset is not None:
        pos = pos + np.asarray(motion_offset, dtype=np.float64)
    q = pos / tiling
    return q - np.floor(q)


@dataclass(frozen=True)
class AtlasLayout:
    """Geometry of a 2D sheet of square volume slices."""

    atlas_width: int
    atlas_height: int
    slice_size: int

    def __post_init__(self):
        if self.slice_size < 1:
            raise ParameterError(f"slice_size must be >= 1, got {self.slice_size}")
        if self.atlas_width % self.slice_size or self.atlas_height % self.slice_size:
            raise FormatError(
                f"atlas {self.atlas_width}x{self.atlas_height} is not an exact grid of "
                f"{self.slice_size}px slices")

    @property
    def columns(self) -> int:
        return self.atlas_width // self.slice_size

    @property
    def rows(self) -> int:
        return self.atlas_height // self.slice_size

    @classmethod
    def for_volume(cls, dims: Tuple[int, int, int]) -> "AtlasLayout":
        """Default near-square layout: 128-cubes map to 2048x1024 (16x8)."""
        nx, ny, nz = dims
        if nx != ny:
            raise FormatError(f"atlas slices must be square, got {nx}x{ny}")
        start = math.isqrt(nz - 1) + 1 if nz > 1 else 1
        columns = next(c for c in range(start, nz + 1) if nz % c == 0)
        rows = nz // columns
        return cls(atlas_width=columns * nx, atlas_height=rows * nx, slice_size=nx)


def _check_layout(dims: Tuple[int, int, int], layout: AtlasLayout) -> None:
    nx, ny, nz = dims
    if layout.slice_size != nx or nx != ny:
        raise FormatError(
            f"layout slice size {layout.slice_size} does not match volume slices {nx}x{ny}")
    if layout.columns * layout.rows != nz:
        raise FormatError(
            f"layout grid {layout.columns}x{layout.rows} holds {layout.columns * layout.rows} "
            f"slices but the volume has {nz}")


def atlas_encode(tex: VolumeTexture, layout: Optional[AtlasLayout] = None) -> np.ndarray:
    """Tile the volume's z-slices into one float32 image (H, W, C)."""
    if layout is None:
        layout = AtlasLayout.for_volume(tex.dims)
    _check_layout(tex.dims, layout)
    nx, ny, nz = tex.dims
    grid = tex.voxels.reshape(layout.rows, layout.columns, ny, nx, tex.channels)
    sheet = grid.transpose(0, 2, 1, 3, 4).reshape(layout.rows * ny, layout.columns * nx, tex.channels)
    return np.ascontiguousarray(sheet)


def atlas_decode(image: np.ndarray, layout: AtlasLayout, color_id: str = "volume") -> VolumeTexture:
    """Rebuild a volume from an atlas image (float32 passthrough, uint8 as value/255)."""
    img = np.asarray(image)
    if img.ndim == 2:
        img = img[:, :, None]
    h, w, channels = img.shape
    if (h, w) != (layout.atlas_height, layout.atlas_width):
        raise FormatError(
            f"image {w}x{h} does not match layout {layout.atlas_width}x{layout.atlas_height}")
    if img.dtype == np.uint8:
        img = img.astype(np.float32) / 255.0
    else:
        img = img.astype(np.float32)
    s = layout.slice_size
    nz = layout.columns * layout.rows
    grid = img.reshape(layout.rows, s, layout.columns, s, channels)
    voxels = np.ascontiguousarray(grid.transpose(0, 2, 1, 3, 4).reshape(nz, s, s, channels))
    return VolumeTexture(dims=(s, s, nz), channels=channels, voxels=voxels, color_id=color_id)


def save_volume(tex: VolumeTexture, base_path: str, fmt: str = "raw",
                generator: Optional[dict] = None) -> str:
    """Write `<base>.vtex.json` plus a `.vtex.raw` or `.vtex.png` atlas.

    raw is lossless little-endian float32; png quantizes to 8 bits and
    requires values in [0, 1] (out-of-range values are clipped). Returns
    the header path.
    """
    if fmt not in ("raw", "png"):
        raise ParameterError(f"format must be 'raw' or 'png', got {fmt!r}")
    layout = AtlasLayout.for_volume(tex.dims)
    sheet = atlas_encode(tex, layout)
    data_name = os.path.basename(base_path) + ".vtex." + fmt
    data_path = base_path + ".vtex." + fmt
    if fmt == "raw":
        with open(data_path, "wb") as f:
            f.write(np.ascontiguousarray(sheet, dtype="<f4").tobytes())
        bit_depth = 32
    else:
        quant = np.clip(sheet, 0.0, 1.0)
        quant = np.round(quant * 255.0).astype(np.uint8)
        if tex.channels == 1:
            quant = quant[:, :, 0]
        Image.fromarray(quant, mode=_PIL_MODES[tex.channels]).save(data_path)
        bit_depth = 8

    header = {
        "format_version": 1,
        "dims": list(tex.dims),
        "channels": tex.channels,
        "color_id": tex.color_id,
        "bit_depth": bit_depth,
        "byte_order": "little",
        "atlas": {
            "width": layout.atlas_width,
            "height": layout.atlas_height,
            "slice_size": layout.slice_size,
            "columns": layout.columns,
            "rows": layout.rows,
        },
        "data_file": data_name,
    }
    if generator is not None:
        header["generator"] = generator
    header_path = base_path + ".vtex.json"
    with open(header_path, "w") as f:
        json.dump(header, f, indent=2)
        f.write("\n")
    return header_path


def load_volume(header_path: str) -> VolumeTexture:
    """Load a volume from its `.vtex.json` header."""
    with open(header_path) as f:
        try:
            header = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed volume header {header_path}: {exc}") from exc
    try:
        dims = tuple(int(d) for d in header["dims"])
        channels = int(header["channels"])
        atlas = header["atlas"]
        layout = AtlasLayout(int(atlas["width"]), int(atlas["height"]), int(atlas["slice_size"]))
        bit_depth = int(header["bit_depth"])
        data_file = header["data_file"]
    except KeyError as exc:
        raise FormatError(f"volume header {header_path} is missing key {exc}") from exc

    data_path = os.path.join(os.path.dirname(header_path), data_file)
    if bit_depth == 32:
        raw = np.fromfile(data_path, dtype="<f4")
        expected = layout.atlas_width * layout.atlas_height * channels
        if raw.size != expected:
            raise FormatError(
                f"raw atlas {data_path} holds {raw.size} floats, expected {expected}")
        image = raw.reshape(layout.atlas_height, layout.atlas_width, channels)
    elif bit_depth == 8:
        image = np.asarray(Image.open(data_path))
    else:
        raise FormatError(f"unsupported bit depth {bit_depth}")

    tex = atlas_decode(image, layout, color_id=header.get("color_id", "volume"))
    if tex.dims != dims:
        raise FormatError(f"decoded dims {tex.dims} disagree with header dims {dims}")
    return tex
