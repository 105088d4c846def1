"""Core op semantics against hand-rolled loop oracles and frozen values."""

import numpy as np
import pytest

from clft.tensor_ops import (
    conv2d,
    conv_transpose2d,
    gelu,
    layer_norm,
    matmul,
    resize_bilinear,
    softmax,
)


def matmul_oracle(a, b):
    """Triple-loop float64 matrix product."""
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for t in range(k):
                acc += float(a[i, t]) * float(b[t, j])
            out[i, j] = acc
    return out


def conv2d_oracle(x, w, b=None, stride=1, pad=0):
    """Direct-sum float64 convolution, one output element at a time."""
    c, h, wd = x.shape
    f, _, kh, kw = w.shape
    xp = np.zeros((c, h + 2 * pad, wd + 2 * pad), dtype=np.float64)
    xp[:, pad : pad + h, pad : pad + wd] = x
    out_h = (h + 2 * pad - kh) // stride + 1
    out_w = (wd + 2 * pad - kw) // stride + 1
    out = np.zeros((f, out_h, out_w), dtype=np.float64)
    for fi in range(f):
        for oi in range(out_h):
            for oj in range(out_w):
                acc = 0.0
                for ci in range(c):
                    for ki in range(kh):
                        for kj in range(kw):
                            acc += float(xp[ci, oi * stride + ki, oj * stride + kj]) * float(
                                w[fi, ci, ki, kj]
                            )
                out[fi, oi, oj] = acc + (float(b[fi]) if b is not None else 0.0)
    return out


def resize_oracle(x, out_h, out_w):
    """Per-pixel half-pixel bilinear lookup in float64."""
    c, h, w = x.shape
    out = np.zeros((c, out_h, out_w), dtype=np.float64)
    for oi in range(out_h):
        sv = (oi + 0.5) * h / out_h - 0.5
        v0 = int(np.floor(sv))
        fv = sv - v0
        v0c, v1c = min(max(v0, 0), h - 1), min(max(v0 + 1, 0), h - 1)
        for oj in range(out_w):
            su = (oj + 0.5) * w / out_w - 0.5
            u0 = int(np.floor(su))
            fu = su - u0
            u0c, u1c = min(max(u0, 0), w - 1), min(max(u0 + 1, 0), w - 1)
            for ci in range(c):
                top = float(x[ci, v0c, u0c]) * (1 - fu) + float(x[ci, v0c, u1c]) * fu
                bot = float(x[ci, v1c, u0c]) * (1 - fu) + float(x[ci, v1c, u1c]) * fu
                out[ci, oi, oj] = top * (1 - fv) + bot * fv
    return out


class TestMatmul:
    def test_frozen_2x2(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        b = np.array([[5.0, 6.0], [7.0, 8.0]], dtype=np.float32)
        expected = np.array([[19.0, 22.0], [43.0, 50.0]])
        assert np.array_equal(matmul(a, b), expected)
        assert np.array_equal(matmul_oracle(a, b), expected)

    def test_identity_is_exact(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((5, 7)).astype(np.float32)
        assert np.array_equal(matmul(np.eye(5, dtype=np.float32), a), a)

    def test_ones_row_column_counts(self):
        k = 13
        out = matmul(np.ones((1, k), np.float32), np.ones((k, 1), np.float32))
        assert out.shape == (1, 1) and out[0, 0] == k

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n, k, m = rng.integers(1, 7, size=3)
            a = rng.standard_normal((n, k)).astype(np.float32)
            b = rng.standard_normal((k, m)).astype(np.float32)
            got = matmul(a, b)
            want = matmul_oracle(a, b)
            assert got.dtype == np.float32
            assert np.allclose(got, want, rtol=1e-5, atol=1e-6)

    def test_associativity(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            a = rng.standard_normal((4, 5)).astype(np.float32)
            b = rng.standard_normal((5, 6)).astype(np.float32)
            c = rng.standard_normal((6, 3)).astype(np.float32)
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            assert np.allclose(left, right, atol=1e-4)

    def test_shape_errors_name_both_shapes(self):
        with pytest.raises(ValueError, match=r"\(2, 3\).*\(4, 5\)"):
            matmul(np.zeros((2, 3)), np.zeros((4, 5)))
        with pytest.raises(ValueError, match="2-d"):
            matmul(np.zeros(3), np.zeros((3, 2)))

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((32, 17)).astype(np.float32)
        b = rng.standard_normal((17, 9)).astype(np.float32)
        assert np.array_equal(matmul(a, b), matmul(a, b))


class TestSoftmax:
    def test_frozen_values(self):
        assert np.allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5])
        assert np.allclose(softmax(np.array([0.0, np.log(2.0)])), [1 / 3, 2 / 3])

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            shape = tuple(rng.integers(1, 9, size=2))
            x = (rng.standard_normal(shape) * 10).astype(np.float32)
            axis = int(rng.integers(0, 2))
            sums = softmax(x, axis=axis).sum(axis=axis)
            assert np.all(np.abs(sums - 1.0) <= 1e-6)

    def test_large_magnitudes_stay_finite(self):
        out = softmax(np.array([1000.0, 1000.0], dtype=np.float32))
        assert np.allclose(out, [0.5, 0.5]) and np.isfinite(out).all()
        out = softmax(np.array([-1e4, 0.0, 1e4], dtype=np.float32))
        assert np.isfinite(out).all() and abs(out.sum() - 1.0) <= 1e-6

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((3, 6))
        assert np.allclose(softmax(x), softmax(x + 100.0), atol=1e-6)

    def test_axis_out_of_range(self):
        with pytest.raises(ValueError, match="axis"):
            softmax(np.zeros((2, 2)), axis=2)


class TestLayerNorm:
    def test_two_point_row(self):
        out = layer_norm(np.array([[1.0, 3.0]]), np.ones(2), np.zeros(2), eps=1e-12)
        assert np.allclose(out, [[-1.0, 1.0]], atol=1e-6)

    def test_constant_row_maps_to_beta(self):
        gamma = np.ones(5)
        beta = np.full(5, 2.5)
        out = layer_norm(np.full((3, 5), 7.0), gamma, beta)
        assert np.allclose(out, 2.5)

    def test_normalizes_mean_and_variance(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((4, 16)) * 3 + 5
        out = layer_norm(x, np.ones(16), np.zeros(16), eps=1e-10)
        assert np.allclose(out.mean(axis=-1), 0.0, atol=1e-5)
        assert np.allclose(out.var(axis=-1), 1.0, atol=1e-4)

    def test_parameter_shape_errors(self):
        with pytest.raises(ValueError, match="feature dim"):
            layer_norm(np.zeros((2, 4)), np.ones(3), np.zeros(4))
        with pytest.raises(ValueError, match="eps"):
            layer_norm(np.zeros((2, 4)), np.ones(4), np.zeros(4), eps=0.0)


class TestGelu:
    def test_frozen_values(self):
        assert gelu(np.array(0.0)) == 0.0
        # x * Phi(x) at x = 1
        assert np.allclose(gelu(np.array(1.0)), 0.8413447460685429, atol=1e-9)

    def test_odd_part_reconstructs_input(self):
        # x * Phi(x) - (-x) * Phi(-x) = x * (Phi(x) + Phi(-x)) = x
        rng = np.random.default_rng(7)
        x = rng.standard_normal(64).astype(np.float32) * 3
        assert np.allclose(gelu(x) - gelu(-x), x, atol=1e-6)

    def test_saturates_to_identity(self):
        x = np.array([8.0, 20.0, 100.0], dtype=np.float32)
        assert np.allclose(gelu(x), x, atol=1e-6)
        assert np.allclose(gelu(-x), 0.0, atol=1e-6)

    def test_preserves_float32(self):
        assert gelu(np.zeros(3, np.float32)).dtype == np.float32


class TestConv2d:
    def test_all_ones_3x3_sums_window(self):
        out = conv2d(np.ones((1, 3, 3), np.float32), np.ones((1, 1, 3, 3), np.float32))
        assert out.shape == (1, 1, 1) and out[0, 0, 0] == 9.0

    def test_1x1_ones_kernel_sums_channels(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((3, 4, 5)).astype(np.float32)
        out = conv2d(x, np.ones((1, 3, 1, 1), np.float32))
        assert np.allclose(out[0], x.sum(axis=0), atol=1e-6)

    def test_output_shape_rule(self):
        out = conv2d(np.zeros((2, 7, 9), np.float32), np.zeros((4, 2, 3, 3), np.float32), stride=2, pad=1)
        assert out.shape == (4, 4, 5)  # floor((7+2-3)/2)+1, floor((9+2-3)/2)+1

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(9)
        for stride in (1, 2):
            for pad in (0, 1):
                x = rng.standard_normal((2, 5, 6)).astype(np.float32)
                w = rng.standard_normal((3, 2, 3, 3)).astype(np.float32)
                b = rng.standard_normal(3).astype(np.float32)
                got = conv2d(x, w, b, stride=stride, pad=pad)
                want = conv2d_oracle(x, w, b, stride=stride, pad=pad)
                assert got.shape == want.shape
                assert np.allclose(got, want, rtol=1e-5, atol=1e-6)

    def test_errors(self):
        x = np.zeros((2, 3, 3), np.float32)
        with pytest.raises(ValueError, match="channel mismatch"):
            conv2d(x, np.zeros((1, 3, 1, 1), np.float32))
        with pytest.raises(ValueError, match="empty output"):
            conv2d(x, np.zeros((1, 2, 5, 5), np.float32))
        with pytest.raises(ValueError, match="stride"):
            conv2d(x, np.zeros((1, 2, 1, 1), np.float32), stride=0)
        with pytest.raises(ValueError, match="bias"):
            conv2d(x, np.zeros((2, 2, 1, 1), np.float32), b=np.zeros(3, np.float32))


class TestConvTranspose2d:
    def test_identity_1x1(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((3, 4, 4)).astype(np.float32)
        w = np.eye(3, dtype=np.float32).reshape(3, 3, 1, 1)
        assert np.allclose(conv_transpose2d(x, w), x, atol=1e-7)

    def test_output_shape_rule(self):
        out = conv_transpose2d(np.zeros((2, 5, 7), np.float32), np.zeros((2, 3, 2, 2), np.float32), stride=2)
        assert out.shape == (3, 10, 14)  # (5-1)*2+2, (7-1)*2+2

    def test_single_pixel_paints_kernel(self):
        x = np.array([[[2.0]]], dtype=np.float32)
        w = np.arange(4, dtype=np.float32).reshape(1, 1, 2, 2)
        out = conv_transpose2d(x, w, stride=2)
        assert np.array_equal(out[0], 2.0 * w[0, 0])

    def test_adjoint_of_conv2d(self):
        # <conv2d(x, w), y> == <x, conv_transpose2d(y, w)>: the (F, C, kh, kw)
        # filter bank reads as (C_in, C_out, kh, kw) in the transposed direction.
        rng = np.random.default_rng(11)
        for stride in (1, 2):
            x = rng.standard_normal((3, 6, 6)).astype(np.float32)
            w = rng.standard_normal((4, 3, 3, 3)).astype(np.float32)
            fwd = conv2d(x, w, stride=stride)
            y = rng.standard_normal(fwd.shape).astype(np.float32)
            back = conv_transpose2d(y, w, stride=stride)
            # stride 2 on a 6x6 input covers only the first 5 rows/cols; the
            # adjoint is zero on the uncovered remainder.
            lhs = float(np.sum(fwd * y))
            rhs = float(np.sum(x[:, : back.shape[1], : back.shape[2]] * back))
            assert abs(lhs - rhs) <= 1e-5 * max(abs(lhs), abs(rhs), 1.0)

    def test_channel_mismatch(self):
        with pytest.raises(ValueError, match="channel mismatch"):
            conv_transpose2d(np.zeros((2, 3, 3), np.float32), np.zeros((3, 2, 2, 2), np.float32))


class TestResizeBilinear:
    def test_frozen_width_doubling(self):
        x = np.array([[[0.0, 1.0]]], dtype=np.float32)
        out = resize_bilinear(x, 1, 4)
        assert np.allclose(out[0, 0], [0.0, 0.25, 0.75, 1.0], atol=1e-7)

    def test_constant_stays_constant(self):
        out = resize_bilinear(np.full((2, 3, 5), 4.25, np.float32), 9, 11)
        assert np.allclose(out, 4.25)

    def test_identity_size(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((2, 4, 6)).astype(np.float32)
        out = resize_bilinear(x, 4, 6)
        assert np.array_equal(out, x) and out is not x

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(8):
            c = int(rng.integers(1, 4))
            h, w = rng.integers(2, 7, size=2)
            oh, ow = rng.integers(1, 13, size=2)
            x = rng.standard_normal((c, int(h), int(w))).astype(np.float32)
            got = resize_bilinear(x, int(oh), int(ow))
            want = resize_oracle(x, int(oh), int(ow))
            assert np.allclose(got, want, rtol=1e-5, atol=1e-6)

    def test_errors(self):
        with pytest.raises(ValueError, match="positive"):
            resize_bilinear(np.zeros((1, 2, 2), np.float32), 0, 3)
        with pytest.raises(ValueError, match=r"\(C, H, W\)"):
            resize_bilinear(np.zeros((2, 2), np.float32), 3, 3)
