"""Dense tensor primitives shared by every model component.

Conventions used throughout the package:

* arrays are C-contiguous numpy arrays, float32 in the model path
  (float64 is allowed and preserved, the gradient checker relies on it);
* matrices are row-major: a token matrix is (tokens, features) and a
  linear map is applied as ``x @ w + b`` with ``w`` of shape (in, out);
* image-like tensors are channel-first: (channels, height, width).

Nothing here owns state; every function is a pure array-in/array-out op.
"""

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 0.7071067811865476


def matmul(a, b):
    """Matrix product of two 2-d arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def softmax(x, axis=-1):
    """Softmax along one axis, computed with max subtraction for stability.

    Slices along ``axis`` sum to 1 within float tolerance for any finite
    input, including large magnitudes.
    """
    x = np.asarray(x)
    if not -x.ndim <= axis < x.ndim:
        raise ValueError(f"softmax axis {axis} out of range for shape {x.shape}")
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def layer_norm(x, gamma, beta, eps=1e-6):
    """Normalize the last dimension to zero mean / unit variance, then scale and shift.

    Uses the biased variance (divide by the feature count). ``gamma`` and
    ``beta`` must be 1-d with the same length as the last dimension of ``x``.
    """
    x = np.asarray(x)
    gamma = np.asarray(gamma)
    beta = np.asarray(beta)
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ValueError(
            f"layer_norm parameter shapes {gamma.shape}/{beta.shape} do not match feature dim {d}"
        )
    if eps <= 0:
        raise ValueError(f"layer_norm eps must be positive, got {eps}")
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    normed = (x - mean) / np.sqrt(var + eps)
    return normed * gamma + beta


def gelu(x):
    """Exact Gaussian error linear unit: x * Phi(x) via erf."""
    x = np.asarray(x)
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def conv2d(x, w, b=None, stride=1, pad=0):
    """2-d cross-correlation of a (C, H, W) input with (F, C, kh, kw) filters.

    Zero padding of ``pad`` pixels on every spatial edge; output size per
    axis is floor((size + 2*pad - kernel) / stride) + 1 and must be >= 1.
    """
    x = np.asarray(x)
    w = np.asarray(w)
    if x.ndim != 3:
        raise ValueError(f"conv2d expects a (C, H, W) input, got shape {x.shape}")
    if w.ndim != 4:
        raise ValueError(f"conv2d expects (F, C, kh, kw) weights, got shape {w.shape}")
    f, wc, kh, kw = w.shape
    c, h, wd = x.shape
    if wc != c:
        raise ValueError(f"conv2d channel mismatch: input has {c}, weights expect {wc}")
    if stride < 1:
        raise ValueError(f"conv2d stride must be >= 1, got {stride}")
    if pad < 0:
        raise ValueError(f"conv2d pad must be >= 0, got {pad}")
    if b is not None:
        b = np.asarray(b)
        if b.shape != (f,):
            raise ValueError(f"conv2d bias shape {b.shape} does not match {f} filters")
    hp, wp = h + 2 * pad, wd + 2 * pad
    if kh > hp or kw > wp:
        raise ValueError(
            f"conv2d kernel ({kh}, {kw}) exceeds padded input ({hp}, {wp}): empty output"
        )
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    # im2col: gather every kernel window, then one matmul does all filters.
    win = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    win = win[:, ::stride, ::stride]  # (C, out_h, out_w, kh, kw)
    out_h, out_w = win.shape[1], win.shape[2]
    cols = win.transpose(1, 2, 0, 3, 4).reshape(out_h * out_w, c * kh * kw)
    out = cols @ w.reshape(f, c * kh * kw).T  # (out_h*out_w, F)
    if b is not None:
        out = out + b
    return np.ascontiguousarray(out.reshape(out_h, out_w, f).transpose(2, 0, 1))


def conv_transpose2d(x, w, b=None, stride=1):
    """Transposed 2-d convolution, the adjoint of ``conv2d`` with the same
    weights, stride and zero padding.

    Input is (C_in, H, W), weights are (C_in, C_out, kh, kw); the output is
    (C_out, (H-1)*stride + kh, (W-1)*stride + kw). For every x, y:
    <conv2d(x, w), y> == <x, conv_transpose2d(y, w)> using the same weight
    array, whose conv2d layout (F, C, kh, kw) reads here as (C_in, C_out,
    kh, kw).
    """
    x = np.asarray(x)
    w = np.asarray(w)
    if x.ndim != 3:
        raise ValueError(f"conv_transpose2d expects a (C, H, W) input, got shape {x.shape}")
    if w.ndim != 4:
        raise ValueError(f"conv_transpose2d expects (C_in, C_out, kh, kw) weights, got shape {w.shape}")
    cin, cout, kh, kw = w.shape
    c, h, wd = x.shape
    if cin != c:
        raise ValueError(f"conv_transpose2d channel mismatch: input has {c}, weights expect {cin}")
    if stride < 1:
        raise ValueError(f"conv_transpose2d stride must be >= 1, got {stride}")
    if b is not None:
        b = np.asarray(b)
        if b.shape != (cout,):
            raise ValueError(f"conv_transpose2d bias shape {b.shape} does not match {cout} channels")
    out_h = (h - 1) * stride + kh
    out_w = (wd - 1) * stride + kw
    # Every input pixel scatters a weighted kernel into the output; one
    # tensordot gives the per-pixel contributions, then kh*kw strided adds
    # place them.
    contrib = np.tensordot(x, w, axes=([0], [0]))  # (H, W, C_out, kh, kw)
    out = np.zeros((cout, out_h, out_w), dtype=contrib.dtype)
    for ki in range(kh):
        for kj in range(kw):
            out[:, ki : ki + (h - 1) * stride + 1 : stride,
                kj : kj + (wd - 1) * stride + 1 : stride] += contrib[:, :, :, ki, kj].transpose(2, 0, 1)
    if b is not None:
        out += b[:, None, None]
    return out


def _axis_lerp(n_in, n_out, dtype):
    # Half-pixel sample positions: centers of the output grid mapped back
    # onto the input grid (align_corners=False convention).
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    lo = np.floor(src).astype(np.int64)
    frac = (src - lo).astype(dtype)
    lo_c = np.clip(lo, 0, n_in - 1)
    hi_c = np.clip(lo + 1, 0, n_in - 1)
    return lo_c, hi_c, frac


def resize_bilinear(x, out_h, out_w):
    """Bilinear resize of a (C, H, W) tensor using half-pixel centers.

    Sample positions are clamped at the borders, so constant images stay
    exactly constant and an identity resize returns the input values.
    """
    x = np.asarray(x)
    if x.ndim != 3:
        raise ValueError(f"resize_bilinear expects a (C, H, W) input, got shape {x.shape}")
    if out_h < 1 or out_w < 1:
        raise ValueError(f"resize_bilinear output size must be positive, got ({out_h}, {out_w})")
    c, h, w = x.shape
    if (h, w) == (out_h, out_w):
        return x.copy()
    dtype = x.dtype if x.dtype in (np.float32, np.float64) else np.float64
    x = x.astype(dtype, copy=False)
    r_lo, r_hi, r_f = _axis_lerp(h, out_h, dtype)
    rows = x[:, r_lo, :] * (1.0 - r_f)[None, :, None] + x[:, r_hi, :] * r_f[None, :, None]
    c_lo, c_hi, c_f = _axis_lerp(w, out_w, dtype)
    out = rows[:, :, c_lo] * (1.0 - c_f) + rows[:, :, c_hi] * c_f
    return np.ascontiguousarray(out)
