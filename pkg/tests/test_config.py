"""Variant table and structural validation."""

import pytest

from clft.config import CLASS_NAMES, ClftConfig, variant_config


def test_variant_table():
    expected = {
        "base": (12, 768, 12, (3, 6, 9, 12)),
        "large": (24, 1024, 16, (5, 12, 18, 24)),
        "huge": (32, 1280, 20, (8, 16, 24, 32)),
        "hybrid": (12, 768, 12, (0, 0, 9, 12)),
    }
    for name, (layers, dim, heads, taps) in expected.items():
        cfg = variant_config(name)
        assert (cfg.layers, cfg.feature_dim, cfg.heads, cfg.tap_layers) == (layers, dim, heads, taps)
        assert cfg.heads * cfg.head_dim == cfg.feature_dim
        assert cfg.scales == (4, 8, 16, 32)
        assert cfg.fusion_dim == 256


def test_default_geometry():
    cfg = variant_config("base")
    assert (cfg.input_rows, cfg.input_cols, cfg.patch) == (384, 384, 16)
    assert (cfg.grid_rows, cfg.grid_cols) == (24, 24)
    assert cfg.tokens == 576
    assert cfg.patch_dim == 768
    assert cfg.mlp_dim == 3072
    assert cfg.classes == CLASS_NAMES


def test_stem_tap_bookkeeping():
    assert variant_config("hybrid").stem_taps == 2
    assert variant_config("base").stem_taps == 0
    assert variant_config("hybrid").token_channels == 256
    assert variant_config("base").token_channels == 768


def test_alternate_input_sizes():
    cfg = variant_config("base", input_rows=128)
    assert cfg.tokens == 64 and cfg.grid_rows == 8
    with pytest.raises(ValueError, match="not divisible"):
        variant_config("base", input_rows=100)


def test_unknown_variant():
    with pytest.raises(ValueError, match="unknown variant"):
        variant_config("giant")


def test_structural_validation():
    with pytest.raises(ValueError, match="heads"):
        ClftConfig(variant="base", layers=12, feature_dim=768, heads=10, tap_layers=(3, 6, 9, 12))
    with pytest.raises(ValueError, match="tap layer"):
        ClftConfig(variant="base", layers=12, feature_dim=768, heads=12, tap_layers=(3, 6, 9, 13))
    with pytest.raises(ValueError, match="non-decreasing"):
        ClftConfig(variant="base", layers=12, feature_dim=768, heads=12, tap_layers=(6, 3, 9, 12))
    with pytest.raises(ValueError, match="hybrid"):
        ClftConfig(variant="base", layers=12, feature_dim=768, heads=12, tap_layers=(0, 6, 9, 12))
    with pytest.raises(ValueError, match="output scales"):
        ClftConfig(variant="base", layers=12, feature_dim=768, heads=12, tap_layers=(3, 6, 9))
    with pytest.raises(ValueError, match="class"):
        variant_config("base", classes=())
