"""Binary file formats: checkpoints, point clouds, images, masks, calibration.

All multi-byte integers are little-endian; all floats are IEEE-754
single precision, little-endian, C order.

Checkpoint ("CLFT"): named float32 tensors.

    magic   4 bytes  "CLFT"
    version u32      1
    count   u32      number of entries
    entry   repeated count times:
        name_len u32, name (utf-8, name_len bytes),
        ndim u32, dims (u32 each),
        dtype u8 (0 = float32), data (raw values, C order)

An empty checkpoint is exactly 12 bytes. Duplicate names, short reads,
unknown dtype bytes and trailing bytes are format errors.

Point cloud ("CLPC"): magic, count u32, then count points of three
float32 (x, y, z) in the sensor frame. A one-point file is 20 bytes.

Images are binary PPM (P6, maxval 255) mapped to float32 [0, 1] planes;
label masks are binary PGM (P5, maxval 255) kept as uint8 with 255
reserved for void. Calibration is a JSON object with exactly the keys
fx, fy, cx, cy (numbers) and extrinsic (16 numbers, row-major 4x4).
"""

import io
import json
import struct

import numpy as np

from clft.lidar_projection import CameraCalibration

CHECKPOINT_MAGIC = b"CLFT"
CLOUD_MAGIC = b"CLPC"
CHECKPOINT_VERSION = 1
DTYPE_FLOAT32 = 0
RASTER_ENTRY = "raster"


class FormatError(ValueError):
    """Malformed or truncated binary payload."""


def _read_exact(stream, n, what):
    data = stream.read(n)
    if len(data) != n:
        raise FormatError(f"truncated {what}: wanted {n} bytes, got {len(data)}")
    return data


def _read_u32(stream, what):
    return struct.unpack("<I", _read_exact(stream, 4, what))[0]


def _entry_bytes(name, array):
    # ascontiguousarray would promote rank-0 arrays to rank 1; asarray keeps them
    array = np.asarray(array, dtype=np.float32, order="C")
    encoded = name.encode("utf-8")
    if not encoded:
        raise FormatError("checkpoint entry names must be non-empty")
    head = struct.pack("<I", len(encoded)) + encoded
    head += struct.pack("<I", array.ndim)
    head += b"".join(struct.pack("<I", d) for d in array.shape)
    head += struct.pack("<B", DTYPE_FLOAT32)
    return head + array.tobytes()


def save_checkpoint(path, entries):
    """Write a name -> array mapping, streaming one entry at a time."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(entries)))
        for name, array in entries.items():
            fh.write(_entry_bytes(name, array))


def checkpoint_to_bytes(entries):
    header = CHECKPOINT_MAGIC + struct.pack("<II", CHECKPOINT_VERSION, len(entries))
    return header + b"".join(_entry_bytes(n, a) for n, a in entries.items())


def _parse_checkpoint(stream):
    magic = _read_exact(stream, 4, "checkpoint magic")
    if magic != CHECKPOINT_MAGIC:
        raise FormatError(f"bad checkpoint magic {magic!r}")
    version = _read_u32(stream, "checkpoint version")
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    count = _read_u32(stream, "checkpoint entry count")
    entries = {}
    for _ in range(count):
        name_len = _read_u32(stream, "entry name length")
        name = _read_exact(stream, name_len, "entry name").decode("utf-8")
        if name in entries:
            raise FormatError(f"duplicate checkpoint entry {name!r}")
        ndim = _read_u32(stream, f"rank of {name}")
        shape = tuple(_read_u32(stream, f"dim of {name}") for _ in range(ndim))
        dtype = _read_exact(stream, 1, f"dtype of {name}")[0]
        if dtype != DTYPE_FLOAT32:
            raise FormatError(f"unknown dtype byte {dtype} for entry {name!r}")
        n = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = _read_exact(stream, 4 * n, f"data of {name}")
        entries[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    if stream.read(1):
        raise FormatError("trailing bytes after the last checkpoint entry")
    return entries


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return _parse_checkpoint(fh)


def checkpoint_from_bytes(data):
    return _parse_checkpoint(io.BytesIO(data))


def save_raster(path, raster):
    """Store a projected (3, H, W) raster as a single-entry checkpoint."""
    raster = np.asarray(raster)
    if raster.ndim != 3 or raster.shape[0] != 3:
        raise ValueError(f"raster must be (3, H, W), got shape {raster.shape}")
    save_checkpoint(path, {RASTER_ENTRY: raster})


def load_raster(path):
    entries = load_checkpoint(path)
    if set(entries) != {RASTER_ENTRY}:
        raise FormatError(f"raster file must hold exactly one entry {RASTER_ENTRY!r}, got {sorted(entries)}")
    raster = entries[RASTER_ENTRY]
    if raster.ndim != 3 or raster.shape[0] != 3:
        raise FormatError(f"raster entry has shape {raster.shape}, expected (3, H, W)")
    return raster


def save_point_cloud(path, points):
    points = np.ascontiguousarray(points, dtype="<f4")
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"point cloud must be (n, 3), got shape {points.shape}")
    with open(path, "wb") as fh:
        fh.write(CLOUD_MAGIC)
        fh.write(struct.pack("<I", points.shape[0]))
        fh.write(points.tobytes())


def load_point_cloud(path):
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "point cloud magic")
        if magic != CLOUD_MAGIC:
            raise FormatError(f"bad point cloud magic {magic!r}")
        count = _read_u32(fh, "point count")
        raw = _read_exact(fh, 12 * count, "point data")
        if fh.read(1):
            raise FormatError("trailing bytes after the last point")
    return np.frombuffer(raw, dtype="<f4").reshape(count, 3).copy()


def _read_netpbm_header(fh, magic, what):
    got = fh.read(2)
    if got != magic:
        raise FormatError(f"bad {what} magic {got!r}, expected {magic!r}")
    fields = []
    while len(fields) < 3:
        tok = b""
        ch = fh.read(1)
        while ch.isspace():
            ch = fh.read(1)
        if ch == b"#":  # comment line
            while ch and ch != b"\n":
                ch = fh.read(1)
            continue
        while ch and not ch.isspace():
            tok += ch
            ch = fh.read(1)
        if not tok.isdigit():
            raise FormatError(f"malformed {what} header near {tok!r}")
        fields.append(int(tok))
        if not ch:
            raise FormatError(f"truncated {what} header")
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"{what} has empty dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{what} maxval must be 255, got {maxval}")
    return width, height


def save_image(path, image):
    """Write a float (3, H, W) image in [0, 1] as binary PPM."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"image must be (3, H, W), got shape {image.shape}")
    levels = np.rint(np.clip(image.astype(np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)
    interleaved = np.ascontiguousarray(levels.transpose(1, 2, 0))
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (image.shape[2], image.shape[1]))
        fh.write(interleaved.tobytes())


def load_image(path):
    with open(path, "rb") as fh:
        width, height = _read_netpbm_header(fh, b"P6", "image")
        raw = _read_exact(fh, 3 * width * height, "image pixels")
        if fh.read(1):
            raise FormatError("trailing bytes after image pixels")
    levels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
    return np.ascontiguousarray(levels.transpose(2, 0, 1)).astype(np.float32) / np.float32(255.0)


def save_mask(path, mask):
    """Write a uint8 (H, W) label mask as binary PGM; 255 marks void."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be (H, W), got shape {mask.shape}")
    if mask.dtype != np.uint8:
        raise ValueError(f"mask must be uint8, got {mask.dtype}")
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (mask.shape[1], mask.shape[0]))
        fh.write(np.ascontiguousarray(mask).tobytes())


def load_mask(path):
    with open(path, "rb") as fh:
        width, height = _read_netpbm_header(fh, b"P5", "mask")
        raw = _read_exact(fh, width * height, "mask pixels")
        if fh.read(1):
            raise FormatError("trailing bytes after mask pixels")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width).copy()


CALIB_KEYS = ("fx", "fy", "cx", "cy", "extrinsic")


def save_calibration(path, calib):
    payload = {
        "fx": calib.fx,
        "fy": calib.fy,
        "cx": calib.cx,
        "cy": calib.cy,
        "extrinsic": [float(v) for v in np.asarray(calib.extrinsic).reshape(-1)],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_calibration(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"calibration is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError("calibration must be a JSON object")
    if set(payload) != set(CALIB_KEYS):
        raise FormatError(
            f"calibration keys must be exactly {sorted(CALIB_KEYS)}, got {sorted(payload)}"
        )
    for key in ("fx", "fy", "cx", "cy"):
        if not isinstance(payload[key], (int, float)) or isinstance(payload[key], bool):
            raise FormatError(f"calibration {key} must be a number")
    ext = payload["extrinsic"]
    if (
        not isinstance(ext, list)
        or len(ext) != 16
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in ext)
    ):
        raise FormatError("calibration extrinsic must be a list of 16 numbers (row-major 4x4)")
    try:
        return CameraCalibration(
            fx=float(payload["fx"]),
            fy=float(payload["fy"]),
            cx=float(payload["cx"]),
            cy=float(payload["cy"]),
            extrinsic=np.asarray(ext, dtype=np.float64).reshape(4, 4),
        )
    except ValueError as exc:
        raise FormatError(f"bad calibration: {exc}") from exc
