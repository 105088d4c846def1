"""Camera-LiDAR fusion transformer for traffic-object segmentation.

Pure numpy/scipy implementation: patch embedding, transformer encoder,
convolutional fusion decoder, LiDAR-to-camera projection, void-aware
segmentation metrics, binary checkpoint/point-cloud formats, and a CLI.
"""

from clft.config import CLASS_NAMES, ClftConfig, variant_config

__all__ = ["CLASS_NAMES", "ClftConfig", "variant_config"]

__version__ = "0.1.0"
