"""Command line: generate, render, validate and inspect volumetric clouds.

Exit codes: 0 success, 1 usage error, 2 input or validation error, 3 internal
or output error. Diagnostics go to stderr; data only goes to declared output
paths (and to stdout for ``validate``/``info``).
"""
import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import Callable, List, Optional, TypeVar

from voxelight import __version__
from voxelight.errors import OutputError, VoxelightError
from voxelight.models import Encoding, Quantization
from voxelight.services.cloud_service import CloudService
from voxelight.services.render_service import ImageFormat, RenderService
from voxelight.services.scene_service import SceneService
from voxelight.services.scenegen_service import ScenegenService
from voxelight.shading import tone_map

logger = logging.getLogger("voxelight.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

T = TypeVar("T")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; usage errors here are 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0.0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64), got {text}")
    return value


# ============= File helpers =============

def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise VoxelightError(f"cannot read {path}: {exc.strerror or exc}")


def _write_bytes(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}")


def _load(path: str, parse: Callable[[bytes], T]) -> T:
    """Parse a file, prefixing any diagnostic with its path."""
    data = _read_bytes(path)
    try:
        return parse(data)
    except VoxelightError as exc:
        exc.detail = f"{path}: {exc.detail}"
        raise


# ============= Commands =============

def cmd_generate(args: argparse.Namespace) -> int:
    demo = ScenegenService.demo_scene(args.scene)
    encoding = Encoding.ASCII if args.ascii else Encoding.BINARY
    _write_bytes(args.out, CloudService.serialize_cloud(demo.grid, encoding, args.quantize))
    logger.info("wrote %s (%d voxels)", args.out, len(demo.grid))
    if args.scene_out:
        scene_out = Path(args.scene_out)
        cloud_ref = os.path.relpath(os.path.abspath(args.out), os.path.abspath(scene_out.parent))
        for variant, cfg in demo.variants.items():
            target = scene_out
            if len(demo.variants) > 1:
                target = scene_out.with_name(f"{scene_out.stem}.{variant}{scene_out.suffix or '.json'}")
            cfg = cfg.model_copy(update={"cloud": cloud_ref})
            _write_bytes(str(target), SceneService.serialize_scene(cfg))
            logger.info("wrote %s", target)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    cfg = _load(args.scene, SceneService.parse_scene)
    cfg = SceneService.apply_overrides(cfg, spp=args.spp, max_depth=args.depth, seed=args.seed,
                                       width=args.width, height=args.height)
    cloud_path = args.cloud
    if cloud_path is None:
        cloud_path = str(Path(args.scene).parent / cfg.cloud)
    grid = _load(cloud_path, CloudService.parse_cloud)
    scene = SceneService.build_scene(cfg, grid)
    fb = RenderService.render(scene, workers=args.workers)
    image = RenderService.encode(tone_map(fb, args.display_gamma), ImageFormat.for_path(args.out))
    _write_bytes(args.out, image)
    logger.info("wrote %s (digest %s)", args.out, fb.digest()[:16])
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = CloudService.validate_cloud(_read_bytes(args.cloud))
    if report.valid:
        print("OK")
        return EXIT_OK
    for violation in report.violations:
        logger.error("%s: %s", args.cloud, violation)
    return EXIT_INPUT


def cmd_info(args: argparse.Namespace) -> int:
    grid = _load(args.cloud, CloudService.parse_cloud)
    info = CloudService.cloud_info(grid)
    if args.json:
        print(info.model_dump_json(indent=2))
        return EXIT_OK
    print("dims: {} {} {}".format(*info.dims))
    print(f"voxel_size: {info.voxel_size!r}")
    print(f"occupied: {info.occupied}")
    for name, stats in info.attributes.items():
        print(f"{name}: min={stats.min:.6g} max={stats.max:.6g} mean={stats.mean:.6g}")
    for name, count in info.presets.items():
        print(f"preset {name}: {count}")
    print(f"unmatched: {info.unmatched}")
    return EXIT_OK


# ============= Entry point =============

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="voxelight", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a demo scene's cloud (and scene configs)")
    gen.add_argument("--scene", required=True, help="demo scene name")
    gen.add_argument("--out", required=True, help="cloud output path (.ply)")
    gen.add_argument("--scene-out", help="scene config output path (.json)")
    gen.add_argument("--quantize", choices=[q.value for q in Quantization], default=Quantization.FLOAT32.value)
    gen.add_argument("--ascii", action="store_true", help="ASCII body instead of binary")
    gen.set_defaults(handler=cmd_generate)

    ren = sub.add_parser("render", help="render a cloud under a scene config")
    ren.add_argument("--scene", required=True, help="scene config (.json)")
    ren.add_argument("--cloud", help="cloud file; defaults to the scene's cloud path")
    ren.add_argument("--out", required=True, help="image output path (.ppm or .png)")
    ren.add_argument("--spp", type=_positive_int)
    ren.add_argument("--depth", type=_positive_int)
    ren.add_argument("--seed", type=_seed)
    ren.add_argument("--width", type=_positive_int)
    ren.add_argument("--height", type=_positive_int)
    ren.add_argument("--workers", type=_positive_int, default=1)
    ren.add_argument("--display-gamma", type=_positive_float, default=2.2)
    ren.set_defaults(handler=cmd_render)

    val = sub.add_parser("validate", help="check a cloud file and list every violation")
    val.add_argument("--cloud", required=True)
    val.set_defaults(handler=cmd_validate)

    inf = sub.add_parser("info", help="summarize a cloud file")
    inf.add_argument("--cloud", required=True)
    inf.add_argument("--json", action="store_true", help="print the summary as JSON")
    inf.set_defaults(handler=cmd_info)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("voxelight")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    _configure_logging(args)
    try:
        return args.handler(args)
    except VoxelightError as exc:
        logger.error("%s: %s", type(exc).__name__, exc.detail)
        return exc.exit_code
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
