"""Command-line front end: restore, degrade, eval, edges.

One executable with four subcommands. Validation failures (bad flags,
config contradictions, mismatched image sizes) exit 2; file problems
(missing, malformed, truncated) exit 1; success exits 0. Reports go to
standard output, diagnostics to standard error.

Outputs are written to a temporary file and renamed into place, so a
failing run never leaves a partial or clobbered output behind.

Pipeline settings resolve in three layers: built-in defaults, then an
optional config file of flat `key = value` lines (`#` starts a
comment), then explicit command-line flags. Unknown config keys are an
error; silently ignoring a typo would quietly run with defaults.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ContractViolation, FormatError
from .image_model import (
    DepthMap,
    load_color_ppm,
    load_depth_pgm,
    save_color_ppm,
    save_depth_pgm,
    save_mask_pgm,
    to_grayscale,
)
from .edge_analysis import detect_edges, sobel_gradients, theta_to_units
from .kernels import KernelParams
from .pipeline import PipelineConfig, restore
from .preprocess import StructuringElement
from .evaluate import DegradeSpec, compare, degrade, make_scene

DEGRADE_SCENE_SIZE = (160, 120)

_DEFAULTS = {
    "sigma_s": 3.0,
    "sigma_r_color": 25.0,
    "sigma_r_depth": 30.0,
    "sigma_x": 5.0,
    "sigma_y": 1.5,
    "window_radius": 5,
    "edge_threshold": 100.0,
    "r_edge": None,
    "hole_expand_radius": 1,
    "max_fill_passes": 64,
    "closing_radius": 2,
    "threads": 1,
    "isotropic_only": False,
}

_INT_KEYS = {"window_radius", "r_edge", "hole_expand_radius", "max_fill_passes",
             "closing_radius", "threads"}
_BOOL_KEYS = {"isotropic_only"}


def parse_config_file(path: str) -> dict:
    """Read flat `key = value` settings; see module doc for the format."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise FormatError(f"cannot read config file {path}: {e}") from e
    settings = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractViolation(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _DEFAULTS:
            raise ContractViolation(f"{path}:{lineno}: unknown config key {key!r}")
        settings[key] = _parse_value(key, value, f"{path}:{lineno}")
    return settings


def _parse_value(key: str, value: str, where: str):
    if key in _BOOL_KEYS:
        low = value.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ContractViolation(f"{where}: {key} wants true/false, got {value!r}")
    try:
        if key in _INT_KEYS:
            return int(value)
        return float(value)
    except ValueError:
        raise ContractViolation(f"{where}: bad value for {key}: {value!r}") from None


def assemble_pipeline_config(args) -> PipelineConfig:
    """Merge defaults, config file, and flags into a validated config."""
    values = dict(_DEFAULTS)
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    cfg = PipelineConfig(
        kernel=KernelParams(
            sigma_s=values["sigma_s"],
            sigma_r_color=values["sigma_r_color"],
            sigma_r_depth=values["sigma_r_depth"],
            sigma_x=values["sigma_x"],
            sigma_y=values["sigma_y"],
            window_radius=values["window_radius"],
        ),
        se=StructuringElement(radius=values["closing_radius"]),
        edge_threshold=values["edge_threshold"],
        r_edge=values["r_edge"],
        hole_expand_radius=values["hole_expand_radius"],
        max_fill_passes=values["max_fill_passes"],
        threads=values["threads"],
        isotropic_only=values["isotropic_only"],
    )
    cfg.validate()
    return cfg


def _write_atomic(path: str, writer) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma-s", type=float, dest="sigma_s",
                   help="isotropic spatial sigma, pixels (default: 3.0)")
    p.add_argument("--sigma-r-color", type=float, dest="sigma_r_color",
                   help="color range sigma, intensity units (default: 25.0)")
    p.add_argument("--sigma-r-depth", type=float, dest="sigma_r_depth",
                   help="depth range sigma, mm; >= 1e9 disables (default: 30.0)")
    p.add_argument("--sigma-x", type=float, dest="sigma_x",
                   help="directional sigma along the edge, pixels (default: 5.0)")
    p.add_argument("--sigma-y", type=float, dest="sigma_y",
                   help="directional sigma across the edge, pixels (default: 1.5)")
    p.add_argument("--window-radius", type=int, dest="window_radius",
                   help="filter window radius, pixels (default: 5)")
    p.add_argument("--edge-threshold", type=float, dest="edge_threshold",
                   help="gradient magnitude threshold (default: 100.0)")
    p.add_argument("--r-edge", type=int, dest="r_edge",
                   help="edge region radius, pixels (default: window radius)")
    p.add_argument("--hole-expand-radius", type=int, dest="hole_expand_radius",
                   help="hole growth across edge pixels, pixels (default: 1)")
    p.add_argument("--max-fill-passes", type=int, dest="max_fill_passes",
                   help="fill pass cap across both phases (default: 64)")
    p.add_argument("--closing-radius", type=int, dest="closing_radius",
                   help="structuring element radius for closing (default: 2)")
    p.add_argument("--threads", type=int, dest="threads",
                   help="worker threads, 0 = auto; never changes output (default: 1)")
    p.add_argument("--config", help="key = value settings file (flags win over file)")
    p.add_argument("--isotropic-only", action="store_true", dest="isotropic_only",
                   default=None,
                   help="ablation: isotropic JBF everywhere (default: off)")


def cmd_restore(args) -> int:
    cfg = assemble_pipeline_config(args)
    depth = load_depth_pgm(args.depth)
    guide = load_color_ppm(args.color)
    restored, _, report = restore(depth, guide, cfg)
    _write_atomic(args.out, lambda p: save_depth_pgm(restored, p))
    for line in report.lines():
        print(line)
    return 0


def cmd_degrade(args) -> int:
    spec = DegradeSpec(
        noise_sigma=args.noise_sigma,
        speckle_hole_fraction=args.speckle,
        edge_hole_radius=args.edge_hole_radius,
        seed=args.seed,
    )
    spec.validate()
    if (args.clean is None) == (args.scene is None):
        raise ContractViolation("give exactly one input: a clean PGM path or --scene")
    if args.scene is not None:
        w, h = DEGRADE_SCENE_SIZE
        clean, color = make_scene(args.scene, w, h)
        stem, ext = os.path.splitext(args.out)
        _write_atomic(stem + "_clean" + (ext or ".pgm"),
                      lambda p: save_depth_pgm(clean, p))
        _write_atomic(stem + "_color.ppm", lambda p: save_color_ppm(color, p))
    else:
        clean = load_depth_pgm(args.clean)
    degraded = degrade(clean, spec)
    _write_atomic(args.out, lambda p: save_depth_pgm(degraded, p))
    return 0


def cmd_eval(args) -> int:
    if args.tau < 0:
        raise ContractViolation(f"tau must be >= 0, got {args.tau}")
    ref = load_depth_pgm(args.ref)
    test = load_depth_pgm(args.test)
    report = compare(ref, test, tau=args.tau)
    for line in report.lines():
        print(line)
    return 0


def cmd_edges(args) -> int:
    threshold = args.edge_threshold if args.edge_threshold is not None else 100.0
    if not threshold > 0:
        raise ContractViolation(f"edge threshold must be > 0, got {threshold}")
    guide = load_color_ppm(args.color)
    grad = sobel_gradients(to_grayscale(guide))
    edges = detect_edges(grad, threshold)
    _write_atomic(args.out_prefix + "_edges.pgm",
                  lambda p: save_mask_pgm(edges.edge, p))
    theta_map = DepthMap(theta_to_units(edges.theta))
    _write_atomic(args.out_prefix + "_theta.pgm",
                  lambda p: save_depth_pgm(theta_map, p))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthrestore",
        description="Depth map restoration guided by a registered color image.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("restore", help="denoise and hole-fill a depth map")
    p.add_argument("depth", help="input depth map, 16-bit PGM")
    p.add_argument("color", help="registered color guide, PPM")
    p.add_argument("out", help="output depth map path")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("degrade", help="synthesize a corrupted depth map")
    p.add_argument("clean", nargs="?", default=None,
                   help="clean input depth map (omit when using --scene)")
    p.add_argument("out", help="output depth map path")
    p.add_argument("--scene", choices=("step", "ramp", "occluder"),
                   help="generate this 160x120 scene instead of reading a file; "
                        "also writes <out>_clean.pgm and <out>_color.ppm")
    p.add_argument("--seed", type=int, default=0,
                   help="64-bit RNG seed (default: 0)")
    p.add_argument("--noise-sigma", type=float, default=0.0, dest="noise_sigma",
                   help="Gaussian depth noise sigma, mm (default: 0)")
    p.add_argument("--speckle", type=float, default=0.0,
                   help="fraction of pixels punched to holes (default: 0)")
    p.add_argument("--edge-hole-radius", type=int, default=0, dest="edge_hole_radius",
                   help="hole band radius at depth discontinuities (default: 0)")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("eval", help="compare two depth maps")
    p.add_argument("ref", help="reference depth map, 16-bit PGM")
    p.add_argument("test", help="depth map under test, 16-bit PGM")
    p.add_argument("--tau", type=float, default=10.0,
                   help="bad pixel threshold, mm (default: 10)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("edges", help="dump edge mask and orientation map")
    p.add_argument("color", help="color image, PPM")
    p.add_argument("out_prefix", help="output path prefix")
    p.add_argument("--edge-threshold", type=float, dest="edge_threshold",
                   help="gradient magnitude threshold (default: 100.0)")
    p.set_defaults(func=cmd_edges)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ContractViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
