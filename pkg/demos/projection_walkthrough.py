"""
Point cloud to camera plane
===========================

Shows how a LiDAR sweep becomes an image-shaped raster: rigid transform
into the camera frame, pinhole projection, nearest-depth selection.
"""

import numpy as np

from clft.lidar_projection import CameraCalibration, project_points, transform_points

# A camera looking down the sensor's +x axis: x forward, y left, z up
# becomes z forward (depth), x right, y down in the camera frame.
extrinsic = np.eye(4)
extrinsic[:3, :3] = [[0.0, -1.0, 0.0],
                     [0.0, 0.0, -1.0],
                     [1.0, 0.0, 0.0]]
calib = CameraCalibration(fx=50.0, fy=50.0, cx=32.0, cy=32.0, extrinsic=extrinsic)

# Three points straight ahead at different ranges, one off to the left,
# and one behind the sensor that can never be visible.
points = np.array(
    [
        [10.0, 0.0, 0.0],
        [5.0, 0.0, 0.0],
        [20.0, 0.0, 0.0],
        [10.0, 3.0, 1.0],
        [-4.0, 0.0, 0.0],
    ],
    dtype=np.float32,
)

cam = transform_points(points, calib.extrinsic)
print("camera-frame coordinates (x right, y down, z depth):")
print(np.round(cam, 2))

raster = project_points(points, calib, height=64, width=64)
hit_v, hit_u = np.nonzero(raster[2])
print("\npixels hit:", list(zip(hit_v.tolist(), hit_u.tolist())))

# The three forward points collide at the image center; the closest wins.
print("depth stored at the center pixel:", float(raster[2, 32, 32]), "(nearest of 5/10/20)")

# The left/up point lands left of and above center: u = fx*x/z + cx.
u = 50.0 * (-3.0) / 10.0 + 32.0
v = 50.0 * (-1.0) / 10.0 + 32.0
print("closed-form landing spot for the offset point:", (v, u))

# Behind-camera points are culled before projection, so the raster stays
# a faithful visibility map.
behind = project_points(points[4:5], calib, height=64, width=64)
print("raster from the behind-sensor point is empty:", not behind.any())
