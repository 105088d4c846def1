"""
The on-disk formats, byte by byte
=================================

Every artifact the toolkit reads or writes has a tiny documented binary
layout. This walk creates each one, prints the leading bytes, and shows
that corruption is caught loudly instead of read quietly.
"""

import tempfile
from pathlib import Path

import numpy as np

from clft.io_formats import (
    FormatError,
    checkpoint_from_bytes,
    checkpoint_to_bytes,
    load_point_cloud,
    save_image,
    save_mask,
    save_point_cloud,
)

workdir = Path(tempfile.mkdtemp(prefix="clft_formats_"))

# Checkpoints: magic, version, count, then length-prefixed named tensors.
data = checkpoint_to_bytes({"layer.weight": np.arange(4, dtype=np.float32)})
print("checkpoint bytes:", data[:12].hex(" "), "... total", len(data))
print("  magic:", data[:4], "version:", data[4], "entries:", data[8])

back = checkpoint_from_bytes(data)
print("  round trip:", {k: v.tolist() for k, v in back.items()})

# A flipped byte never comes back as silent garbage.
try:
    checkpoint_from_bytes(b"CLFX" + data[4:])
except FormatError as err:
    print("  corrupted magic ->", err)
try:
    checkpoint_from_bytes(data[:-2])
except FormatError as err:
    print("  truncated data ->", err)

# Point clouds: magic, count, then n * 3 little-endian float32.
cloud_path = workdir / "sweep.clpc"
save_point_cloud(cloud_path, np.array([[1.5, -2.0, 7.25]], np.float32))
raw = cloud_path.read_bytes()
print("\npoint cloud file:", raw.hex(" "), f"({len(raw)} bytes for one point)")
print("  reads back:", load_point_cloud(cloud_path).tolist())

# Images are plain binary PPM, masks plain binary PGM: one header line
# pair, then raw samples. Any pixel tool can open them.
img_path = workdir / "frame.ppm"
save_image(img_path, np.zeros((3, 2, 2), np.float32))
print("\nppm header + pixels:", img_path.read_bytes())

mask_path = workdir / "mask.pgm"
save_mask(mask_path, np.array([[0, 255]], np.uint8))
print("pgm header + pixels:", mask_path.read_bytes())
