"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
malformed inputs, mismatched checkpoints), 3 check failure (gradcheck
found a gradient out of tolerance).
"""

import argparse
import sys

import numpy as np

from clft.config import CLASS_NAMES, variant_config
from clft.decoder import (
    CAMERA_ONLY,
    CROSS_FUSION,
    LIDAR_ONLY,
    MissingModalityError,
    clft_forward,
    predict_mask,
)
from clft.fixtures import make_fixtures
from clft.gradcheck import run_all
from clft.io_formats import (
    FormatError,
    load_calibration,
    load_checkpoint,
    load_image,
    load_point_cloud,
    load_raster,
    save_checkpoint,
    save_mask,
    save_raster,
)
from clft.lidar_projection import project_points
from clft.metrics import evaluate_directory, format_report, report
from clft.params import (
    CheckpointMismatchError,
    init_model_params,
    model_weights_from_params,
)

_MODES = {"camera": CAMERA_ONLY, "lidar": LIDAR_ONLY, "fusion": CROSS_FUSION}
_VARIANTS = ("base", "large", "huge", "hybrid")


class _UsageError(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser
        self.message = message


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting itself."""

    def error(self, message):
        raise _UsageError(self, message)


def cmd_init(args):
    cfg = variant_config(args.config)
    params = init_model_params(cfg, seed=args.seed)
    save_checkpoint(args.out, params)
    total = sum(int(np.prod(p.shape)) for p in params.values())
    print(f"wrote {args.out}: {len(params)} tensors, {total} parameters")
    return 0


def cmd_project(args):
    points = load_point_cloud(args.cloud)
    calib = load_calibration(args.calib)
    raster = project_points(points, calib, args.height, args.width)
    save_raster(args.out, raster)
    hits = int(np.count_nonzero(raster[2]))
    print(f"wrote {args.out}: {len(points)} points, {hits} pixels hit")
    return 0


def cmd_infer(args):
    cfg = variant_config(args.config)
    mode = _MODES[args.mode]
    if mode in (CAMERA_ONLY, CROSS_FUSION) and not args.camera:
        raise MissingModalityError(f"--mode {args.mode} requires --camera")
    if mode in (LIDAR_ONLY, CROSS_FUSION) and not args.lidar:
        raise MissingModalityError(f"--mode {args.mode} requires --lidar")
    camera = load_image(args.camera) if mode in (CAMERA_ONLY, CROSS_FUSION) else None
    lidar = load_raster(args.lidar) if mode in (LIDAR_ONLY, CROSS_FUSION) else None
    weights = model_weights_from_params(load_checkpoint(args.checkpoint), cfg)
    logits = clft_forward(camera, lidar, mode, weights, cfg)
    save_mask(args.out, predict_mask(logits))
    if args.out_logits:
        save_checkpoint(args.out_logits, {"logits": logits.astype(np.float32)})
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args):
    classes = tuple(name.strip() for name in args.classes.split(","))
    if any(not name for name in classes):
        raise ValueError(f"empty class name in {args.classes!r}")
    counts = evaluate_directory(args.pred_dir, args.gt_dir, len(classes))
    print(format_report(report(counts, classes), args.format))
    return 0


def cmd_gradcheck(args):
    reports = run_all(tolerance=args.tolerance, seeds=range(10))
    for r in reports:
        verdict = "pass" if r.passed else "FAIL"
        print(f"{r.op_name:<12}max_rel {r.max_rel_error:.3e}  max_abs {r.max_abs_error:.3e}  {verdict}")
    return 0 if all(r.passed for r in reports) else 3


def cmd_make_fixtures(args):
    stems = make_fixtures(args.out, seed=args.seed, count=args.count)
    print(f"wrote {len(stems)} frames under {args.out}")
    return 0


def _build_parser():
    parser = _Parser(prog="clft", description="Camera-LiDAR fusion segmentation toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("init", help="create a seeded random checkpoint")
    p.add_argument("--config", required=True, choices=_VARIANTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("project", help="rasterize a point cloud onto the image plane")
    p.add_argument("--cloud", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--height", type=int, default=384)
    p.add_argument("--width", type=int, default=384)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("infer", help="segment one frame")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config", required=True, choices=_VARIANTS)
    p.add_argument("--mode", required=True, choices=sorted(_MODES))
    p.add_argument("--camera", help="input image (PPM)")
    p.add_argument("--lidar", help="projected raster, from the project command")
    p.add_argument("--out", required=True, help="predicted mask (PGM)")
    p.add_argument("--out-logits", help="optionally store raw logits")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="score predicted masks against ground truth")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--classes", default=",".join(CLASS_NAMES))
    p.add_argument("--format", choices=("table", "tsv"), default="table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="verify analytic gradients of the core ops")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("make-fixtures", help="generate synthetic paired frames")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=8)
    p.set_defaults(func=cmd_make_fixtures)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err.parser.format_usage(), file=sys.stderr, end="")
        print(f"error: {err.message}", file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        print(parser.format_usage(), file=sys.stderr, end="")
        print("error: a command is required", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except MissingModalityError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (FormatError, CheckpointMismatchError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
