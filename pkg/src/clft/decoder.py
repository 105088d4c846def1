"""Convolutional fusion decoder: taps to feature pyramid to class logits.

The encoder is tapped at four depths per modality branch. Each tap is
read out to spatial tokens, folded back into a 2-d feature map, and
resampled to its output stride (4/8/16/32 relative to the input image).
Fusion walks the pyramid deepest-first: at every stage the camera and
LiDAR maps each pass a two-unit residual conv chain, the previous
stage's output is upsampled 2x, everything present is summed, and one
merge unit smooths the result. The final stride-4 map enters the
segmentation head.
"""

from dataclasses import dataclass

import numpy as np

from clft.embedding import PatchGrid, embed, hybrid_stem, patchify, patch_grid
from clft.encoder import encoder_forward
from clft.tensor_ops import (
    conv2d,
    conv_transpose2d,
    gelu,
    matmul,
    resize_bilinear,
)

READOUT_MODES = ("ignore", "add", "project")

CAMERA_ONLY = "camera_only"
LIDAR_ONLY = "lidar_only"
CROSS_FUSION = "cross_fusion"
MODES = (CAMERA_ONLY, LIDAR_ONLY, CROSS_FUSION)


class MissingModalityError(ValueError):
    """An inference mode was asked to run without one of its inputs."""


@dataclass
class ReadoutWeights:
    weight: np.ndarray  # (2 * feature_dim, feature_dim)
    bias: np.ndarray  # (feature_dim,)


@dataclass
class ResampleWeights:
    """1x1 projection to fusion width plus an optional up/down resampler."""

    project_w: np.ndarray  # (fusion_dim, in_channels, 1, 1)
    project_b: np.ndarray
    up_w: np.ndarray = None  # (fusion_dim, fusion_dim, f, f), transposed conv
    up_b: np.ndarray = None
    down_w: np.ndarray = None  # (fusion_dim, fusion_dim, 3, 3), stride-2 conv
    down_b: np.ndarray = None


@dataclass
class RcuWeights:
    """Residual conv unit: two bias-free 3x3 convs, GELU pre-activations.

    Bias-free keeps rcu(0) == 0 and makes the zero-weight unit an exact
    identity.
    """

    conv1_w: np.ndarray  # (fusion_dim, fusion_dim, 3, 3)
    conv2_w: np.ndarray


@dataclass
class FusionStageWeights:
    camera_rcu1: RcuWeights
    camera_rcu2: RcuWeights
    lidar_rcu1: RcuWeights
    lidar_rcu2: RcuWeights
    merge_rcu: RcuWeights


@dataclass
class HeadWeights:
    deconv_w: np.ndarray  # (fusion_dim, fusion_dim, 2, 2), transposed conv
    deconv_b: np.ndarray
    classifier_w: np.ndarray  # (num_classes, fusion_dim, 1, 1)
    classifier_b: np.ndarray


@dataclass
class BranchWeights:
    """Everything one modality needs up to its four resampled tap maps."""

    embed: object  # EmbeddingWeights
    encoder: list  # [EncoderLayerWeights] * layers
    readouts: list  # one ReadoutWeights per transformer tap, None for stem taps
    resamples: list  # one ResampleWeights per tap
    stem: object = None  # StemWeights, hybrid only


@dataclass
class ModelWeights:
    camera: BranchWeights
    lidar: BranchWeights
    fusion: list  # one FusionStageWeights per scale, shallowest first
    head: HeadWeights


def readout(tokens, mode, w=None):
    """Fold the class token into the patch tokens.

    ignore   drop it;
    add      add it to every patch token;
    project  concatenate it to every patch token and map 2D -> D.
    Returns (grid.tokens, feature_dim) spatial tokens.
    """
    if mode not in READOUT_MODES:
        raise ValueError(f"unknown readout mode {mode!r}; expected one of {READOUT_MODES}")
    seq = tokens.tokens
    if seq.shape[0] != tokens.grid.tokens + 1:
        raise ValueError(
            f"token matrix has {seq.shape[0]} rows for a grid of {tokens.grid.tokens} patches"
        )
    cls, patches = seq[:1], seq[1:]
    if mode == "ignore":
        return patches.copy()
    if mode == "add":
        return patches + cls
    if w is None:
        raise ValueError("project readout needs weights")
    d = seq.shape[1]
    if w.weight.shape != (2 * d, d):
        raise ValueError(f"project readout weight {w.weight.shape} does not match dim {d}")
    stacked = np.concatenate([patches, np.broadcast_to(cls, patches.shape)], axis=1)
    return matmul(stacked, w.weight) + w.bias


def reassemble(spatial, grid):
    """Fold (tokens, channels) spatial tokens into a (channels, rows, cols) map.

    Token k lands at grid position (k // cols, k % cols), inverting the
    row-major order produced by patchify and the hybrid stem.
    """
    spatial = np.asarray(spatial)
    if spatial.ndim != 2 or spatial.shape[0] != grid.tokens:
        raise ValueError(f"spatial tokens {spatial.shape} do not match grid {grid.rows}x{grid.cols}")
    c = spatial.shape[1]
    return np.ascontiguousarray(spatial.T.reshape(c, grid.rows, grid.cols))


def resample_stage(fmap, scale, cfg, w):
    """Project a tap map to fusion width and move it to stride ``scale``.

    The target side is input_size / scale. Relative to the map's own
    resolution that is a factor of 4, 2, 1 or 1/2 across the supported
    variants: integer factors use a transposed conv (kernel = stride =
    factor), 1 keeps the projection only, 1/2 uses a 3x3 stride-2 conv.
    """
    fmap = np.asarray(fmap)
    if fmap.ndim != 3:
        raise ValueError(f"resample expects a (C, H, W) map, got shape {fmap.shape}")
    target_h = cfg.input_rows // scale
    target_w = cfg.input_cols // scale
    x = conv2d(fmap, w.project_w, w.project_b)
    h = x.shape[1]
    if target_h == h:
        if target_w != x.shape[2]:
            raise ValueError(f"anisotropic resample {x.shape[1:]} -> ({target_h}, {target_w})")
        return x
    if target_h % h == 0:
        factor = target_h // h
        if w.up_w is None or w.up_w.shape[2] != factor:
            raise ValueError(f"no upsample weights for factor {factor} at scale {scale}")
        return conv_transpose2d(x, w.up_w, w.up_b, stride=factor)
    if h == 2 * target_h:
        if w.down_w is None:
            raise ValueError(f"no downsample weights at scale {scale}")
        return conv2d(x, w.down_w, w.down_b, stride=2, pad=1)
    raise ValueError(f"unsupported resample {h} -> {target_h} at scale {scale}")


def rcu(fmap, w):
    """Residual conv unit: fmap + conv(gelu(conv(gelu(fmap))))."""
    h = conv2d(gelu(fmap), w.conv1_w, pad=1)
    h = conv2d(gelu(h), w.conv2_w, pad=1)
    return fmap + h


def fuse_stage(camera, lidar, prev, w):
    """Combine one pyramid stage: per-branch RCU chains, the 2x-upsampled
    previous stage, summed, then one merge RCU.

    Any of the three inputs may be None and then contributes the zero
    map; at least one branch map must be present. ``prev`` arrives at
    half the stage resolution.
    """
    if camera is None and lidar is None:
        raise ValueError("fuse_stage needs at least one branch map")
    ref = camera if camera is not None else lidar
    if camera is not None and lidar is not None and camera.shape != lidar.shape:
        raise ValueError(f"branch shapes differ: {camera.shape} vs {lidar.shape}")
    total = np.zeros_like(ref)
    if camera is not None:
        total = total + rcu(rcu(camera, w.camera_rcu1), w.camera_rcu2)
    if lidar is not None:
        total = total + rcu(rcu(lidar, w.lidar_rcu1), w.lidar_rcu2)
    if prev is not None:
        up = resize_bilinear(prev, 2 * prev.shape[1], 2 * prev.shape[2])
        if up.shape != ref.shape:
            raise ValueError(f"upsampled previous stage {up.shape} does not match {ref.shape}")
        total = total + up
    return rcu(total, w.merge_rcu)


def segmentation_head(fused, w, out_rows, out_cols):
    """Stride-4 fusion map to per-class logits at image resolution.

    2x transposed conv, GELU, 1x1 class conv, then bilinear 2x back to
    (out_rows, out_cols).
    """
    fused = np.asarray(fused)
    if fused.ndim != 3 or fused.shape[1] * 4 != out_rows or fused.shape[2] * 4 != out_cols:
        raise ValueError(
            f"segmentation head expects a stride-4 map for ({out_rows}, {out_cols}), got {fused.shape}"
        )
    x = gelu(conv_transpose2d(fused, w.deconv_w, w.deconv_b, stride=2))
    x = conv2d(x, w.classifier_w, w.classifier_b)
    return resize_bilinear(x, out_rows, out_cols)


def branch_feature_maps(image, bw, cfg, readout_mode="project"):
    """One modality from image to its four stride-aligned fusion maps."""
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"expected a (3, H, W) input, got shape {image.shape}")
    if image.shape[1:] != (cfg.input_rows, cfg.input_cols):
        image = resize_bilinear(image, cfg.input_rows, cfg.input_cols)
    stem_maps = []
    if cfg.variant == "hybrid":
        stem_tokens, stem_maps = hybrid_stem(image, bw.stem)
        grid = PatchGrid(cfg.grid_rows, cfg.grid_cols, cfg.patch)
        embedded = embed(stem_tokens, bw.embed, grid)
    else:
        grid = patch_grid(cfg.input_rows, cfg.input_cols, cfg.patch)
        embedded = embed(patchify(image, cfg.patch), bw.embed, grid)
    taps = encoder_forward(embedded, bw.encoder, cfg.heads, cfg.tap_layers)
    by_layer = dict(zip(sorted(set(t for t in cfg.tap_layers if t > 0)), taps))
    maps = []
    stem_iter = iter(stem_maps)
    for k, tap_layer in enumerate(cfg.tap_layers):
        if tap_layer == 0:
            fmap = next(stem_iter)
        else:
            tokens = by_layer[tap_layer]
            fmap = reassemble(readout(tokens, readout_mode, bw.readouts[k]), grid)
        maps.append(resample_stage(fmap, cfg.scales[k], cfg, bw.resamples[k]))
    return maps


def decode_feature_maps(camera_maps, lidar_maps, fusion, cfg):
    """Deepest-first pyramid fusion; returns the final stride-4 map."""
    prev = None
    for k in range(len(cfg.scales) - 1, -1, -1):
        cam = camera_maps[k] if camera_maps is not None else None
        lid = lidar_maps[k] if lidar_maps is not None else None
        prev = fuse_stage(cam, lid, prev, fusion[k])
    return prev


def clft_forward(camera, lidar, mode, weights, cfg, readout_mode="project"):
    """Full forward pass; returns (num_classes, input_rows, input_cols) logits.

    ``camera`` is a (3, H, W) image in [0, 1]; ``lidar`` is a (3, H, W)
    raster of camera-frame point coordinates. Either may be None when the
    mode does not use it.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    use_camera = mode in (CAMERA_ONLY, CROSS_FUSION)
    use_lidar = mode in (LIDAR_ONLY, CROSS_FUSION)
    if use_camera and camera is None:
        raise MissingModalityError(f"mode {mode} needs a camera image")
    if use_lidar and lidar is None:
        raise MissingModalityError(f"mode {mode} needs a lidar raster")
    camera_maps = branch_feature_maps(camera, weights.camera, cfg, readout_mode) if use_camera else None
    lidar_maps = branch_feature_maps(lidar, weights.lidar, cfg, readout_mode) if use_lidar else None
    fused = decode_feature_maps(camera_maps, lidar_maps, weights.fusion, cfg)
    return segmentation_head(fused, weights.head, cfg.input_rows, cfg.input_cols)


def predict_mask(logits):
    """Per-pixel argmax over the class axis; ties go to the lowest index."""
    logits = np.asarray(logits)
    if logits.ndim != 3:
        raise ValueError(f"expected (classes, H, W) logits, got shape {logits.shape}")
    if logits.shape[0] > 255:
        raise ValueError(f"{logits.shape[0]} classes do not fit an 8-bit mask with void=255")
    return np.argmax(logits, axis=0).astype(np.uint8)
