"""Synthetic paired frames for smoke tests and demos.

Each frame is a camera image of simple geometric traffic objects over a
sky/ground gradient, the matching label mask (with a 2-pixel void rim
around every object), and a LiDAR point cloud built by back-projecting
object and ground pixels to known depths, so the cloud re-projects onto
the objects that produced it. One shared calibration file covers all
frames.
"""

from pathlib import Path

import numpy as np
from scipy.ndimage import binary_dilation

from clft.io_formats import save_calibration, save_image, save_mask, save_point_cloud
from clft.lidar_projection import CameraCalibration
from clft.metrics import VOID

# label -> fill color (r, g, b) and depth range in meters
_COLORS = {
    1: (0.25, 0.30, 0.65),  # vehicle
    2: (0.70, 0.28, 0.25),  # pedestrian
    3: (0.25, 0.58, 0.30),  # cyclist
    4: (0.78, 0.72, 0.20),  # sign
}
_DEPTHS = {1: (8.0, 22.0), 2: (6.0, 15.0), 3: (7.0, 18.0), 4: (10.0, 25.0)}
_VOID_RIM = 2


def default_calibration(height, width):
    """Forward-mounted camera: LiDAR x/y/z (fwd/left/up) to camera z/-x/-y."""
    rotation = np.array(
        [
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0],
        ]
    )
    extrinsic = np.eye(4)
    extrinsic[:3, :3] = rotation
    extrinsic[:3, 3] = [0.05, -0.12, 0.08]
    return CameraCalibration(
        fx=0.86 * width,
        fy=0.86 * width,
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        extrinsic=extrinsic,
    )


def _background(height, width, rng):
    sky = np.array([0.55, 0.65, 0.80])
    ground = np.array([0.36, 0.34, 0.30])
    blend = np.linspace(0.0, 1.0, height)[None, :, None]
    img = (sky[:, None, None] * (1 - blend) + ground[:, None, None] * blend).astype(np.float64)
    return np.broadcast_to(img, (3, height, width)).copy()


def _vehicle(height, width, rng):
    ww = int(rng.integers(width // 6, width // 3))
    hh = int(rng.integers(height // 8, height // 5))
    u0 = int(rng.integers(6, width - ww - 6))
    v0 = int(rng.integers(height // 2, height - hh - 6))
    shape = np.zeros((height, width), dtype=bool)
    shape[v0 : v0 + hh, u0 : u0 + ww] = True
    return shape


def _pedestrian(height, width, rng):
    ww = int(rng.integers(width // 24, width // 14))
    hh = int(rng.integers(height // 6, height // 4))
    u0 = int(rng.integers(6, width - ww - 6))
    v0 = int(rng.integers(height // 2, height - hh - 6))
    shape = np.zeros((height, width), dtype=bool)
    shape[v0 : v0 + hh, u0 : u0 + ww] = True
    return shape


def _cyclist(height, width, rng):
    radius = int(rng.integers(height // 20, height // 10))
    cu = int(rng.integers(radius + 6, width - radius - 6))
    cv = int(rng.integers(height // 2, height - radius - 6))
    vv, uu = np.mgrid[0:height, 0:width]
    return (vv - cv) ** 2 + (uu - cu) ** 2 <= radius * radius


def _sign(height, width, rng):
    side = int(rng.integers(width // 24, width // 12))
    u0 = int(rng.integers(6, width - side - 6))
    v0 = int(rng.integers(6, height // 3))
    shape = np.zeros((height, width), dtype=bool)
    shape[v0 : v0 + side, u0 : u0 + side] = True
    return shape


_BUILDERS = {1: _vehicle, 2: _pedestrian, 3: _cyclist, 4: _sign}


def _back_project(us, vs, depths, calib):
    """Pixel centers at given camera depths, expressed in the LiDAR frame."""
    x = (us - calib.cx) * depths / calib.fx
    y = (vs - calib.cy) * depths / calib.fy
    cam = np.stack([x, y, depths], axis=1)
    rot = calib.extrinsic[:3, :3]
    t = calib.extrinsic[:3, 3]
    return (cam - t) @ rot  # rot is orthonormal: inverse is the transpose


def _make_frame(height, width, calib, rng):
    img = _background(height, width, rng)
    gt = np.zeros((height, width), dtype=np.uint8)
    clouds = []
    present = [label for label in (1, 2, 3, 4) if rng.random() < 0.85]
    if not present:
        present = [1]
    for label in present:
        shape = _BUILDERS[label](height, width, rng)
        color = np.array(_COLORS[label])
        img[:, shape] = color[:, None]
        gt[shape] = label
        lo, hi = _DEPTHS[label]
        depth = float(rng.uniform(lo, hi))
        vs, us = np.nonzero(shape)
        step = max(1, len(vs) // 400)
        vs, us = vs[::step], us[::step]
        depths = depth + rng.uniform(-0.25, 0.25, size=len(vs))
        clouds.append(_back_project(us.astype(np.float64), vs.astype(np.float64), depths, calib))
    # void rim around every object, over background only
    objects = gt > 0
    rim = binary_dilation(objects, np.ones((2 * _VOID_RIM + 1,) * 2)) & ~objects
    gt[rim] = VOID
    # sparse far returns off the background
    n_ground = 500
    us = rng.uniform(2, width - 2, n_ground)
    vs = rng.uniform(height * 0.45, height - 2, n_ground)
    depths = rng.uniform(28.0, 60.0, n_ground)
    clouds.append(_back_project(us, vs, depths, calib))
    # a few returns behind the sensor plane; projection must cull them
    behind = np.empty((6, 3))
    behind[:, 0] = rng.uniform(-8.0, -1.0, size=6)
    behind[:, 1:] = rng.uniform(-3.0, 3.0, size=(6, 2))
    clouds.append(behind)
    points = np.concatenate(clouds, axis=0)
    img += rng.normal(0.0, 0.015, img.shape)
    return np.clip(img, 0.0, 1.0), gt, points.astype(np.float32)


def make_fixtures(out_dir, seed=0, count=8, height=384, width=384):
    """Write ``count`` synthetic frames plus calibration under ``out_dir``.

    Layout: calib.json, camera/frame_NN.ppm, gt/frame_NN.pgm,
    cloud/frame_NN.clpc. Output bytes are fully determined by the
    arguments. Returns the frame stems.
    """
    if count < 1:
        raise ValueError(f"need at least one frame, got {count}")
    out = Path(out_dir)
    for sub in ("camera", "gt", "cloud"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    calib = default_calibration(height, width)
    save_calibration(out / "calib.json", calib)
    rng = np.random.default_rng(seed)
    stems = []
    for i in range(count):
        stem = f"frame_{i:02d}"
        img, gt, points = _make_frame(height, width, calib, rng)
        save_image(out / "camera" / f"{stem}.ppm", img)
        save_mask(out / "gt" / f"{stem}.pgm", gt)
        save_point_cloud(out / "cloud" / f"{stem}.clpc", points)
        stems.append(stem)
    return stems
