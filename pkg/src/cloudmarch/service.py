"""HTTP preview API.

Endpoints:
  GET  /health   liveness probe, plain "ok"
  GET  /presets  preset list plus validation bounds and the default scene,
                 so clients never hardcode ranges
  POST /render   scene overrides + optional preview_scale -> PNG bytes;
                 X-Render-Time-Ms and X-Extinction-Samples headers
  POST /diff     {"left": overrides, "right": overrides} -> disparity PNG

Renders are CPU-saturating, so execution is serialized: one render runs at
a time and at most four more may wait; anything beyond that is refused
with 429 rather than queued without bound.
"""

from __future__ import annotations

import io
import threading
import time
from dataclasses import replace
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .config import (BOUNDS, SceneConfig, config_from_dict, resolve_textures,
                     scene_to_dict)
from .errors import CloudmarchError, ParameterError
from .march import HdrImage, image_diff, render, tone_map
from .presets import preset_summaries


class RenderGate:
    """Bounded admission: max_active running plus queue_depth waiting."""

    def __init__(self, max_active: int = 1, queue_depth: int = 4):
        self.capacity = max_active + queue_depth
        self._held = 0
        self._count_lock = threading.Lock()
        self._run_lock = threading.Semaphore(max_active)

    def try_enter(self) -> bool:
        """Claim a slot; False means the caller should answer 429."""
        with self._count_lock:
            if self._held >= self.capacity:
                return False
            self._held += 1
            return True

    def leave(self) -> None:
        with self._count_lock:
            self._held -= 1

    def run(self, fn):
        """Execute fn while holding the single-render lock."""
        with self._run_lock:
            return fn()


def _scene_from_body(body: dict) -> tuple[SceneConfig, int]:
    """Split a /render body into a validated scene and a preview scale."""
    if not isinstance(body, dict):
        raise ParameterError("request body must be a JSON object")
    body = dict(body)
    scale = body.pop("preview_scale", 1)
    if isinstance(scale, bool) or not isinstance(scale, int):
        raise ParameterError(f"preview_scale: expected an integer, got {scale!r}")
    b = BOUNDS["preview_scale"]
    if not b["min"] <= scale <= b["max"]:
        raise ParameterError(
            f"preview_scale: value {scale} outside [{b['min']}, {b['max']}]")
    scene = config_from_dict(body)
    if scale > 1:
        w, h = scene.camera.resolution
        pw, ph = max(1, w // scale), max(1, h // scale)
        scene = replace(scene, camera=replace(scene.camera, resolution=(pw, ph)))
    return scene, scale


def _png_bytes(img, exposure: float) -> bytes:
    from PIL import Image

    arr = tone_map(img, exposure)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def create_app(gate: Optional[RenderGate] = None, render_fn=render) -> FastAPI:
    """Build the service; gate and render_fn are injectable for tests."""
    app = FastAPI(title="cloud renderer preview service")
    gate = gate or RenderGate()

    # Browser clients are served from a separate origin; the timing and
    # counter headers must be exposed or they are stripped cross-origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Render-Time-Ms", "X-Extinction-Samples"],
    )

    @app.exception_handler(CloudmarchError)
    async def _domain_error(request: Request, exc: CloudmarchError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.get("/health", response_class=PlainTextResponse)
    def health() -> str:
        return "ok"

    @app.get("/presets")
    def presets() -> dict:
        return {
            "presets": preset_summaries(),
            "bounds": BOUNDS,
            "defaults": scene_to_dict(SceneConfig()),
        }

    def _guarded_render(scene: SceneConfig) -> tuple[HdrImage, float]:
        t0 = time.perf_counter()
        img = gate.run(lambda: render_fn(scene, textures=resolve_textures(scene)))
        return img, (time.perf_counter() - t0) * 1e3

    @app.post("/render")
    def render_endpoint(body: dict) -> Response:
        scene, _ = _scene_from_body(body)
        if not gate.try_enter():
            return JSONResponse(status_code=429, content={"error": "render queue full"})
        try:
            img, elapsed_ms = _guarded_render(scene)
        finally:
            gate.leave()
        return Response(
            content=_png_bytes(img, scene.exposure),
            media_type="image/png",
            headers={
                "X-Render-Time-Ms": f"{elapsed_ms:.1f}",
                "X-Extinction-Samples": str(img.stats.extinction_samples),
            })

    @app.post("/diff")
    def diff_endpoint(body: dict) -> Response:
        if not isinstance(body, dict) or set(body) - {"left", "right", "gain"}:
            raise ParameterError('diff body must be {"left": ..., "right": ..., "gain"?}')
        gain = body.get("gain", 1.0)
        if isinstance(gain, bool) or not isinstance(gain, (int, float)) or not 0 < gain <= 100:
            raise ParameterError(f"gain: expected a number in (0, 100], got {gain!r}")
        left, _ = _scene_from_body(body.get("left", {}))
        right, _ = _scene_from_body(body.get("right", {}))
        if left.camera.resolution != right.camera.resolution:
            raise ParameterError("left and right resolutions must match for diff")
        if not gate.try_enter():
            return JSONResponse(status_code=429, content={"error": "render queue full"})
        try:
            img_l, ms_l = _guarded_render(left)
            img_r, ms_r = _guarded_render(right)
        finally:
            gate.leave()
        disparity = image_diff(img_l, img_r)
        return Response(
            content=_png_bytes(disparity, float(gain)),
            media_type="image/png",
            headers={
                "X-Render-Time-Ms": f"{ms_l + ms_r:.1f}",
                "X-Extinction-Samples": str(img_l.stats.extinction_samples
                                            + img_r.stats.extinction_samples),
            })

    return app


def serve(host: str = "127.0.0.1", port: int = 8787) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")
