"""
Image to logits, one shape at a time
====================================

Follows a single camera frame through every stage of the base model and
prints the tensor shape after each step. Uses a reduced 128x128 input so
the walk finishes in seconds; the arithmetic is identical at 384.
"""

import numpy as np

from clft.config import variant_config
from clft.decoder import (
    branch_feature_maps,
    decode_feature_maps,
    readout,
    reassemble,
    segmentation_head,
)
from clft.embedding import embed, patch_grid, patchify
from clft.encoder import encoder_forward
from clft.params import init_model_params, model_weights_from_params

cfg = variant_config("base", input_rows=128)
print("variant:", cfg.variant, "| layers:", cfg.layers, "| width:", cfg.feature_dim,
      "| heads:", cfg.heads, "| taps:", cfg.tap_layers)

weights = model_weights_from_params(init_model_params(cfg, seed=0), cfg)
image = np.random.default_rng(1).random((3, 128, 128)).astype(np.float32)
print("input image:", image.shape)

# 16x16 patches flatten to rows of a token matrix, row-major over the grid.
patches = patchify(image, cfg.patch)
print("patch tokens:", patches.shape, f"({cfg.grid_rows}x{cfg.grid_cols} grid)")

# Linear projection, a learned class token in front, positional offsets.
grid = patch_grid(128, 128, cfg.patch)
embedded = embed(patches, weights.camera.embed, grid)
print("embedded sequence:", embedded.tokens.shape, "(class token first)")

# The encoder runs all layers and snapshots the tap layers on the way.
taps = encoder_forward(embedded, weights.camera.encoder, cfg.heads, cfg.tap_layers)
print("tap snapshots:", [t.tokens.shape for t in taps], "at layers", cfg.tap_layers)

# Readout folds the class token back in; reassembly restores the grid.
folded = readout(taps[0], "project", weights.camera.readouts[0])
spatial = reassemble(folded, grid)
print("after readout + reassembly:", spatial.shape)

# Each tap is projected to the shared fusion width at its pyramid stride.
maps = branch_feature_maps(image, weights.camera, cfg)
for k, fmap in enumerate(maps):
    print(f"  stage {k}: stride {cfg.scales[k]:>2} ->", fmap.shape)

# Deepest-first fusion walks the pyramid back up to stride 4...
fused = decode_feature_maps(maps, None, weights.fusion, cfg)
print("fused map:", fused.shape)

# ...and the head climbs the last factor of 4 to per-pixel class scores.
logits = segmentation_head(fused, weights.head, cfg.input_rows, cfg.input_cols)
print("logits:", logits.shape, "for classes", cfg.classes)
