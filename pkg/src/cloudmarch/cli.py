"""Command-line interface: render, bench, corpus, serve.

Exit codes: 0 success, 1 configuration/validation error, 2 I/O error.
Diagnostics go to standard error; bench output goes to standard out.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import List, Optional, Tuple

from .errors import CloudmarchError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


def _load_scene(args):
    from .config import load_config
    from .presets import preset

    if args.scene:
        scene = load_config(args.scene)
    else:
        scene = preset(args.preset)
    scenes = scene if isinstance(scene, list) else [scene]
    if args.width or args.height:
        out = []
        for sc in scenes:
            w, h = sc.camera.resolution
            res = (args.width or w, args.height or h)
            out.append(replace(sc, camera=replace(sc.camera, resolution=res)))
        scenes = out
    return scenes


def _write_png(pixels_u8, path: str) -> None:
    from PIL import Image

    Image.fromarray(pixels_u8, mode="RGB").save(path, format="PNG")


def _stem(path: str) -> str:
    return path[:-4] if path.lower().endswith(".png") else path


def _cmd_render(args) -> int:
    from .march import image_diff, read_hdr, render, tone_map, write_hdr

    if args.diff:
        a = read_hdr(args.diff[0])
        b = read_hdr(args.diff[1])
        _write_png(tone_map(image_diff(a, b), exposure=args.diff_gain), args.out)
        print(f"wrote {args.out}", file=sys.stderr)
        return EXIT_OK

    scenes = _load_scene(args)
    multi = len(scenes) > 1
    images = []
    for i, scene in enumerate(scenes):
        img = render(scene)
        images.append((scene, img))
        out = f"{_stem(args.out)}_{i}.png" if multi else args.out
        _write_png(tone_map(img, scene.exposure), out)
        if args.hdr:
            write_hdr(img, f"{_stem(out)}.hdr")
        print(f"wrote {out} ({img.stats.extinction_samples} extinction samples, "
              f"{img.stats.wall_ms:.0f} ms)", file=sys.stderr)
    if multi and len(images) == 2:
        disparity = image_diff(images[0][1], images[1][1])
        out = f"{_stem(args.out)}_diff.png"
        _write_png(tone_map(disparity, images[0][0].exposure), out)
        print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def _parse_scales(raw: List[str]) -> List[Tuple[float, float]]:
    pairs = []
    for item in raw:
        parts = item.split(",")
        if len(parts) == 1:
            pairs.append((float(parts[0]), float(parts[0])))
        elif len(parts) == 2:
            pairs.append((float(parts[0]), float(parts[1])))
        else:
            raise CloudmarchError(f"bad scale pair {item!r}; use VIEW,SHADOW")
    return pairs


def _cmd_bench(args) -> int:
    from .bench import run_bench
    from .config import resolve_textures

    scenes = _load_scene(args)
    scene = scenes[0]
    scales = _parse_scales(args.scales)
    report = run_bench(scene, frames=args.frames, scales=scales,
                       textures=resolve_textures(scene))
    sys.stdout.write(report.table())
    sys.stdout.write(report.to_json())
    if args.out:
        with open(args.out, "w") as f:
            f.write(report.to_json())
        print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_corpus(args) -> int:
    from .corpus import generate_corpus

    if args.resolution:
        try:
            w, h = args.resolution.lower().split("x")
            resolution = (int(w), int(h))
        except ValueError:
            raise CloudmarchError(
                f"bad resolution {args.resolution!r}; use WIDTHxHEIGHT") from None
    else:
        resolution = (512, 512)
    manifest = generate_corpus(args.out, count=args.count, split=args.split,
                               resolution=resolution, seed=args.seed)
    print(f"wrote {manifest['count']} scenes "
          f"({manifest['train_count']}/{manifest['test_count']} train/test) "
          f"to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    serve(host=args.host, port=args.port)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cloudmarch",
                                description="volumetric cloud renderer")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="render a scene or preset to PNG")
    r.add_argument("--scene", help="scene config JSON path")
    r.add_argument("--preset", default="default", help="preset name when no --scene")
    r.add_argument("--out", required=True, help="output PNG path")
    r.add_argument("--width", type=int, help="override render width")
    r.add_argument("--height", type=int, help="override render height")
    r.add_argument("--hdr", action="store_true", help="also write raw float HDR dump")
    r.add_argument("--diff", nargs=2, metavar=("A", "B"),
                   help="diff two HDR dumps instead of rendering")
    r.add_argument("--diff-gain", type=float, default=1.0,
                   help="exposure gain for the disparity PNG")
    r.set_defaults(fn=_cmd_render)

    b = sub.add_parser("bench", help="timed repeat renders with sample counters")
    b.add_argument("--scene", help="scene config JSON path")
    b.add_argument("--preset", default="default", help="preset name when no --scene")
    b.add_argument("--frames", type=int, default=4, help="frames per run (first is warm-up)")
    b.add_argument("--scales", nargs="+", default=["4,4", "2,2"],
                   metavar="VIEW,SHADOW", help="sample scale pairs")
    b.add_argument("--width", type=int, help="override render width")
    b.add_argument("--height", type=int, help="override render height")
    b.add_argument("--out", help="also write the JSON report here")
    b.set_defaults(fn=_cmd_bench)

    c = sub.add_parser("corpus", help="generate the regression scene corpus")
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--count", type=int, default=500)
    c.add_argument("--split", type=float, default=0.7)
    c.add_argument("--resolution", help="WIDTHxHEIGHT (default 512x512)")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(fn=_cmd_corpus)

    s = sub.add_parser("serve", help="run the HTTP preview service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8787)
    s.set_defaults(fn=_cmd_serve)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CloudmarchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
