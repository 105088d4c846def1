"""Patch extraction, token embedding, and the hybrid convolutional stem."""

from dataclasses import dataclass

import numpy as np

from clft.tensor_ops import conv2d, gelu, matmul


@dataclass(frozen=True)
class PatchGrid:
    """Spatial layout of the patch tokens cut from one image."""

    rows: int
    cols: int
    patch: int

    @property
    def tokens(self):
        return self.rows * self.cols


@dataclass
class EmbeddingWeights:
    projection: np.ndarray  # (token_channels, feature_dim)
    class_token: np.ndarray  # (1, feature_dim)
    positional: np.ndarray  # (tokens + 1, feature_dim)


@dataclass
class TokenMatrix:
    """Embedded token sequence: class token first, then patches row-major."""

    tokens: np.ndarray  # (grid.tokens + 1, feature_dim)
    grid: PatchGrid


def patch_grid(height, width, patch):
    if patch < 1:
        raise ValueError(f"patch size must be >= 1, got {patch}")
    if height % patch or width % patch:
        raise ValueError(f"image ({height}, {width}) not divisible by patch size {patch}")
    return PatchGrid(height // patch, width // patch, patch)


def patchify(image, patch):
    """Cut a (3, H, W) image into non-overlapping patch vectors.

    Output row k is the patch at grid position (k // cols, k % cols); each
    row flattens its patch channel-major, then row-major within a channel.
    The operation is lossless: ``unpatchify`` inverts it exactly.
    """
    image = np.asarray(image)
    if image.ndim != 3:
        raise ValueError(f"patchify expects a (C, H, W) image, got shape {image.shape}")
    c, h, w = image.shape
    grid = patch_grid(h, w, patch)
    blocks = image.reshape(c, grid.rows, patch, grid.cols, patch)
    # (rows, cols, C, ph, pw) -> flatten the trailing three dims per token
    blocks = blocks.transpose(1, 3, 0, 2, 4)
    return np.ascontiguousarray(blocks.reshape(grid.tokens, c * patch * patch))


def unpatchify(patches, grid, channels=3):
    """Reassemble ``patchify`` output back into a (C, H, W) image."""
    patches = np.asarray(patches)
    expected = (grid.tokens, channels * grid.patch * grid.patch)
    if patches.shape != expected:
        raise ValueError(f"patch matrix shape {patches.shape} does not match {expected}")
    p = grid.patch
    blocks = patches.reshape(grid.rows, grid.cols, channels, p, p)
    blocks = blocks.transpose(2, 0, 3, 1, 4)
    return np.ascontiguousarray(blocks.reshape(channels, grid.rows * p, grid.cols * p))


def embed(patches, w, grid):
    """Project patch vectors to feature width, prepend the class token, add
    positional embeddings."""
    patches = np.asarray(patches)
    if patches.ndim != 2:
        raise ValueError(f"embed expects a (tokens, channels) matrix, got shape {patches.shape}")
    n = grid.tokens
    if patches.shape[0] != n:
        raise ValueError(f"{patches.shape[0]} patch vectors for a grid of {n} tokens")
    projected = matmul(patches, w.projection)  # (n, feature_dim)
    if w.class_token.shape != (1, projected.shape[1]):
        raise ValueError(
            f"class token shape {w.class_token.shape} does not match feature dim {projected.shape[1]}"
        )
    seq = np.concatenate([w.class_token, projected], axis=0)
    if w.positional.shape != seq.shape:
        raise ValueError(f"positional shape {w.positional.shape} does not match sequence {seq.shape}")
    return TokenMatrix(np.ascontiguousarray(seq + w.positional), grid)


@dataclass
class BottleneckWeights:
    """One residual bottleneck: 1x1 reduce, 3x3 (optionally strided), 1x1 expand."""

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    conv3_w: np.ndarray
    conv3_b: np.ndarray
    stride: int = 1
    shortcut_w: np.ndarray = None  # 1x1 projection when shape changes
    shortcut_b: np.ndarray = None


@dataclass
class StemWeights:
    conv1_w: np.ndarray  # (c0, 3, 7, 7), stride 2
    conv1_b: np.ndarray
    stages: list  # three lists of BottleneckWeights, strides 4/8/16


def _bottleneck(x, w):
    h = gelu(conv2d(x, w.conv1_w, w.conv1_b))
    h = gelu(conv2d(h, w.conv2_w, w.conv2_b, stride=w.stride, pad=1))
    h = conv2d(h, w.conv3_w, w.conv3_b)
    if w.shortcut_w is not None:
        skip = conv2d(x, w.shortcut_w, w.shortcut_b, stride=w.stride)
    else:
        skip = x
    return gelu(h + skip)


def hybrid_stem(image, stem):
    """Convolutional front end for the hybrid variant.

    A strided 7x7 conv then three bottleneck stages bring a (3, H, W)
    image to strides 4, 8 and 16. Returns the stride-16 map flattened to
    row-major tokens of shape (H/16 * W/16, channels), plus the stride-4
    and stride-8 stage maps for the decoder's shallow taps.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"hybrid_stem expects a (3, H, W) image, got shape {image.shape}")
    if image.shape[1] % 16 or image.shape[2] % 16:
        raise ValueError(f"hybrid_stem needs dims divisible by 16, got {image.shape[1:]}")
    x = gelu(conv2d(image, stem.conv1_w, stem.conv1_b, stride=2, pad=3))
    maps = []
    for stage in stem.stages:
        for block in stage:
            x = _bottleneck(x, block)
        maps.append(x)
    final = maps[-1]  # (channels, H/16, W/16)
    c = final.shape[0]
    tokens = np.ascontiguousarray(final.reshape(c, -1).T)  # (tokens, channels), row-major grid
    return tokens, maps[:-1]
