"""
End-to-end: synthetic frames to a per-class score table
=======================================================

The whole loop in one script: generate paired camera/LiDAR fixtures,
initialize a model, project the point clouds, run fused inference, and
score the predicted masks against ground truth. Everything also exists
as a CLI command (init / project / infer / eval / make-fixtures); this
is the same flow through the Python API.

Expect roughly a minute: the base model is 210M parameters on one CPU.
"""

import tempfile
from pathlib import Path

import numpy as np

from clft.config import CLASS_NAMES, variant_config
from clft.decoder import CROSS_FUSION, clft_forward, predict_mask
from clft.fixtures import make_fixtures
from clft.io_formats import load_calibration, load_image, load_mask, load_point_cloud
from clft.lidar_projection import project_points
from clft.metrics import accumulate, format_report, report
from clft.params import count_params, init_model_params, model_weights_from_params

workdir = Path(tempfile.mkdtemp(prefix="clft_demo_"))
stems = make_fixtures(workdir, seed=11, count=2)
print("fixtures under", workdir, "->", stems)

cfg = variant_config("base")
print(f"initializing {cfg.variant}: {count_params(cfg):,} parameters")
weights = model_weights_from_params(init_model_params(cfg, seed=0), cfg)

calib = load_calibration(workdir / "calib.json")
counts = None
for stem in stems:
    image = load_image(workdir / "camera" / f"{stem}.ppm")
    cloud = load_point_cloud(workdir / "cloud" / f"{stem}.clpc")
    raster = project_points(cloud, calib, image.shape[1], image.shape[2])
    hits = int(np.count_nonzero(raster[2]))
    print(f"{stem}: {len(cloud)} points -> {hits} raster pixels")

    logits = clft_forward(image, raster, CROSS_FUSION, weights, cfg)
    mask = predict_mask(logits)
    gt = load_mask(workdir / "gt" / f"{stem}.pgm")
    counts = accumulate(mask, gt, len(CLASS_NAMES), counts=counts)

# Untrained random weights: expect the dominant class to soak up most
# pixels. The table structure is what this demo is about.
print()
print(format_report(report(counts, CLASS_NAMES)))
