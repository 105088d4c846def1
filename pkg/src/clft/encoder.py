"""Pre-norm transformer encoder with intermediate feature taps."""

from dataclasses import dataclass

import numpy as np

from clft.config import LN_EPS
from clft.embedding import TokenMatrix
from clft.tensor_ops import gelu, layer_norm, matmul, softmax


@dataclass
class EncoderLayerWeights:
    """One residual block: attention and MLP, each behind a layer norm.

    Linear maps follow the package convention y = x @ w + b with w of
    shape (in, out).
    """

    ln1_gamma: np.ndarray
    ln1_beta: np.ndarray
    wq: np.ndarray
    bq: np.ndarray
    wk: np.ndarray
    bk: np.ndarray
    wv: np.ndarray
    bv: np.ndarray
    wo: np.ndarray
    bo: np.ndarray
    ln2_gamma: np.ndarray
    ln2_beta: np.ndarray
    mlp_w1: np.ndarray
    mlp_b1: np.ndarray
    mlp_w2: np.ndarray
    mlp_b2: np.ndarray


def scaled_dot_product_attention(q, k, v):
    """softmax(q k^T / sqrt(d_k)) v for single-head 2-d inputs.

    q is (tq, d_k), k is (tk, d_k), v is (tk, d_v). With a single key the
    softmax row is exactly 1 and the output equals v.
    """
    q = np.asarray(q)
    k = np.asarray(k)
    v = np.asarray(v)
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ValueError(
            f"attention expects 2-d q/k/v, got {q.shape}, {k.shape}, {v.shape}"
        )
    if q.shape[1] != k.shape[1]:
        raise ValueError(f"query dim {q.shape[1]} does not match key dim {k.shape[1]}")
    if k.shape[0] != v.shape[0]:
        raise ValueError(f"{k.shape[0]} keys for {v.shape[0]} values")
    scores = matmul(q, k.T) / np.sqrt(np.float32(q.shape[1]))
    return matmul(softmax(scores, axis=-1), v)


def split_heads(x, heads):
    """View a (tokens, heads * head_dim) matrix as (heads, tokens, head_dim).

    Head i reads the contiguous column slice [i * head_dim, (i+1) * head_dim).
    """
    x = np.asarray(x)
    t, d = x.shape
    if d % heads:
        raise ValueError(f"feature dim {d} not divisible by {heads} heads")
    return x.reshape(t, heads, d // heads).transpose(1, 0, 2)


def merge_heads(per_head):
    """Inverse of split_heads: (heads, tokens, head_dim) -> (tokens, heads * head_dim)."""
    heads, t, hd = per_head.shape
    return np.ascontiguousarray(per_head.transpose(1, 0, 2).reshape(t, heads * hd))


def multi_head_attention(x, w, heads):
    """Project to per-head q/k/v, attend each head, concatenate, project out."""
    x = np.asarray(x)
    q = split_heads(matmul(x, w.wq) + w.bq, heads)
    k = split_heads(matmul(x, w.wk) + w.bk, heads)
    v = split_heads(matmul(x, w.wv) + w.bv, heads)
    outs = [scaled_dot_product_attention(q[h], k[h], v[h]) for h in range(heads)]
    merged = merge_heads(np.stack(outs, axis=0))
    return matmul(merged, w.wo) + w.bo


def _mlp(x, w):
    return matmul(gelu(matmul(x, w.mlp_w1) + w.mlp_b1), w.mlp_w2) + w.mlp_b2


def encoder_layer(x, w, heads):
    """x + MHSA(LN(x)), then + MLP(LN(.)); residuals keep the token width."""
    attn_in = layer_norm(x, w.ln1_gamma, w.ln1_beta, eps=LN_EPS)
    x = x + multi_head_attention(attn_in, w, heads)
    mlp_in = layer_norm(x, w.ln2_gamma, w.ln2_beta, eps=LN_EPS)
    return x + _mlp(mlp_in, w)


def encoder_forward(x, layers, heads, tap_layers):
    """Run the full encoder, snapshotting tokens after each tap layer.

    ``tap_layers`` holds 1-based layer indices; zeros (hybrid stem taps)
    are skipped here and resolved by the caller. Returns one TokenMatrix
    per non-zero tap, in tap order. With all-zero weights every layer is
    an exact identity, so each tap equals the input.
    """
    taps = sorted(set(t for t in tap_layers if t > 0))
    if taps and taps[-1] > len(layers):
        raise ValueError(f"tap layer {taps[-1]} beyond encoder depth {len(layers)}")
    out = {}
    t = x.tokens
    for i, w in enumerate(layers, start=1):
        t = encoder_layer(t, w, heads)
        if i in taps:
            out[i] = TokenMatrix(t.copy(), x.grid)
    return [out[i] for i in taps]
