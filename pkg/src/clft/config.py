"""Model variants and their structural hyperparameters.

Four published variants share one architecture and differ in encoder
depth, token width and head count:

    base    12 layers, 768 dim, 12 heads, taps at layers  3/6/9/12
    large   24 layers, 1024 dim, 16 heads, taps at layers 5/12/18/24
    huge    32 layers, 1280 dim, 20 heads, taps at layers 8/16/24/32
    hybrid  12 layers, 768 dim, 12 heads, convolutional stem; the two
            shallow taps come from the stem's stride-4 and stride-8
            feature maps (encoded as tap layer 0), the two deep taps
            from transformer layers 9 and 12

Every variant decodes the four taps at output strides 4/8/16/32 into a
256-wide fusion pyramid. An input image is resized to a fixed square
(384 by default) and cut into 16x16 patches.
"""

from dataclasses import dataclass

CLASS_NAMES = ("background", "vehicle", "pedestrian", "cyclist", "sign")

PATCH = 16
FUSION_DIM = 256
SCALES = (4, 8, 16, 32)
HEAD_DIM = 64
LN_EPS = 1e-6

# variant -> (layers, feature_dim, heads, tap_layers)
_VARIANTS = {
    "base": (12, 768, 12, (3, 6, 9, 12)),
    "large": (24, 1024, 16, (5, 12, 18, 24)),
    "huge": (32, 1280, 20, (8, 16, 24, 32)),
    "hybrid": (12, 768, 12, (0, 0, 9, 12)),
}

# Hybrid stem: bottleneck widths per stage (expansion 4x) and block counts,
# stages at strides 4/8/16.
STEM_WIDTHS = (16, 32, 64)
STEM_BLOCKS = (3, 4, 6)
STEM_CONV1_CHANNELS = 16
STEM_EXPANSION = 4


@dataclass(frozen=True)
class ClftConfig:
    """Resolved structural description of one model instance."""

    variant: str
    layers: int
    feature_dim: int
    heads: int
    tap_layers: tuple
    input_rows: int = 384
    input_cols: int = 384
    patch: int = PATCH
    fusion_dim: int = FUSION_DIM
    scales: tuple = SCALES
    classes: tuple = CLASS_NAMES
    head_dim: int = HEAD_DIM

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {sorted(_VARIANTS)}")
        if self.heads * self.head_dim != self.feature_dim:
            raise ValueError(
                f"feature dim {self.feature_dim} is not heads ({self.heads}) x head dim ({self.head_dim})"
            )
        if len(self.tap_layers) != len(self.scales):
            raise ValueError(
                f"{len(self.tap_layers)} tap layers for {len(self.scales)} output scales"
            )
        for tap in self.tap_layers:
            if not 0 <= tap <= self.layers:
                raise ValueError(f"tap layer {tap} outside encoder depth {self.layers}")
        if tuple(sorted(self.tap_layers)) != tuple(self.tap_layers):
            raise ValueError(f"tap layers must be non-decreasing, got {self.tap_layers}")
        if self.variant != "hybrid" and 0 in self.tap_layers:
            raise ValueError("stem taps (layer 0) are only defined for the hybrid variant")
        for size, name in ((self.input_rows, "rows"), (self.input_cols, "cols")):
            if size % self.patch:
                raise ValueError(f"input {name} {size} not divisible by patch size {self.patch}")
            if size % max(self.scales):
                raise ValueError(f"input {name} {size} not divisible by coarsest scale {max(self.scales)}")
        if len(self.classes) < 1:
            raise ValueError("at least one class is required")

    @property
    def grid_rows(self):
        return self.input_rows // self.patch

    @property
    def grid_cols(self):
        return self.input_cols // self.patch

    @property
    def tokens(self):
        """Patch tokens per image, class token excluded."""
        return self.grid_rows * self.grid_cols

    @property
    def patch_dim(self):
        """Flattened pixel count per patch (3 color channels)."""
        return 3 * self.patch * self.patch

    @property
    def mlp_dim(self):
        return 4 * self.feature_dim

    @property
    def stem_taps(self):
        """How many of the four taps come from the convolutional stem."""
        return sum(1 for tap in self.tap_layers if tap == 0)

    @property
    def token_channels(self):
        """Width of the tensor entering the patch/token projection."""
        if self.variant == "hybrid":
            return STEM_WIDTHS[-1] * STEM_EXPANSION
        return self.patch_dim


def variant_config(variant, input_rows=384, input_cols=None, classes=CLASS_NAMES):
    """Build the configuration for a named variant at a given input size."""
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(_VARIANTS)}")
    if input_cols is None:
        input_cols = input_rows
    layers, dim, heads, taps = _VARIANTS[variant]
    return ClftConfig(
        variant=variant,
        layers=layers,
        feature_dim=dim,
        heads=heads,
        tap_layers=taps,
        input_rows=input_rows,
        input_cols=input_cols,
        classes=tuple(classes),
    )
