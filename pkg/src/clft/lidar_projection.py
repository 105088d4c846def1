"""Pinhole projection of LiDAR points into a camera-aligned raster."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CameraCalibration:
    """Pinhole intrinsics plus the rigid LiDAR-to-camera transform.

    ``extrinsic`` is a 4x4 row-major homogeneous matrix mapping LiDAR-frame
    points to the camera frame (x right, y down, z forward).
    """

    fx: float
    fy: float
    cx: float
    cy: float
    extrinsic: np.ndarray  # (4, 4) float64

    def __post_init__(self):
        ext = np.asarray(self.extrinsic, dtype=np.float64)
        if ext.shape != (4, 4):
            raise ValueError(f"extrinsic must be 4x4, got shape {ext.shape}")
        if not np.all(np.isfinite(ext)):
            raise ValueError("extrinsic contains non-finite values")
        if not np.array_equal(ext[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError(f"extrinsic bottom row must be [0, 0, 0, 1], got {ext[3]}")
        for name in ("fx", "fy", "cx", "cy"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"intrinsic {name} is not finite")
        if self.fx == 0 or self.fy == 0:
            raise ValueError("focal lengths must be non-zero")
        object.__setattr__(self, "extrinsic", ext)


def round_half_away(x):
    """Round to nearest integer with halves away from zero (0.5 -> 1, -0.5 -> -1)."""
    x = np.asarray(x)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def transform_points(points, extrinsic):
    """Apply a 4x4 rigid transform to (n, 3) points."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"expected (n, 3) points, got shape {points.shape}")
    r = extrinsic[:3, :3]
    t = extrinsic[:3, 3]
    return points @ r.T + t


def project_points(points, calib, height, width):
    """Rasterize LiDAR points onto the image plane.

    Points are moved to the camera frame; those with depth z <= 0 are
    culled. Each survivor maps to pixel column u = round(fx*x/z + cx),
    row v = round(fy*y/z + cy) with halves away from zero; out-of-frame
    pixels are dropped. The raster holds the camera-frame (x, y, z) of
    the nearest point per pixel (depth ties keep the earliest input
    point) and zeros where nothing lands.

    Returns a float32 (3, height, width) raster.
    """
    if height < 1 or width < 1:
        raise ValueError(f"raster size must be positive, got ({height}, {width})")
    raster = np.zeros((3, height, width), dtype=np.float32)
    cam = transform_points(points, calib.extrinsic)
    if cam.shape[0] == 0:
        return raster
    ahead = cam[:, 2] > 0
    cam = cam[ahead]
    if cam.shape[0] == 0:
        return raster
    x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]
    u = round_half_away(calib.fx * x / z + calib.cx).astype(np.int64)
    v = round_half_away(calib.fy * y / z + calib.cy).astype(np.int64)
    inside = (u >= 0) & (u < width) & (v >= 0) & (v < height)
    cam, u, v, z = cam[inside], u[inside], v[inside], z[inside]
    if cam.shape[0] == 0:
        return raster
    # One winner per pixel: sort by (pixel, depth, arrival order) and keep
    # the first row of every pixel group.
    pixel = v * width + u
    order = np.lexsort((np.arange(len(pixel)), z, pixel))
    firsts = np.ones(len(order), dtype=bool)
    firsts[1:] = pixel[order][1:] != pixel[order][:-1]
    winners = order[firsts]
    raster[:, v[winners], u[winners]] = cam[winners].T.astype(np.float32)
    return raster
