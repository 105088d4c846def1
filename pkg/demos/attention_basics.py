"""
Scaled dot-product attention from the ground up
===============================================

Builds attention out of the library's dense primitives and checks the
small invariants that make it trustworthy before any model uses it.
"""

import numpy as np

from clft.encoder import scaled_dot_product_attention, split_heads, merge_heads
from clft.tensor_ops import matmul, softmax

rng = np.random.default_rng(0)

# Five tokens of width 8: q and k live in the same space, v can be wider.
q = rng.standard_normal((5, 8)).astype(np.float32)
k = rng.standard_normal((5, 8)).astype(np.float32)
v = rng.standard_normal((5, 4)).astype(np.float32)

# The row-stochastic attention matrix: scores scaled by sqrt(d_k), then softmax.
scores = matmul(q, k.T) / np.sqrt(np.float32(q.shape[1]))
weights = softmax(scores, axis=-1)
print("attention weights, one row per query:")
print(np.round(weights, 3))
print("row sums (always 1):", weights.sum(axis=1))

out = scaled_dot_product_attention(q, k, v)
print("output shape:", out.shape)

# With a single key there is nothing to weigh: the output IS the value row.
single = scaled_dot_product_attention(q[:1], k[:1], v[:1])
print("single-key attention returns v exactly:", bool(np.array_equal(single, v[:1])))

# Shuffling the tokens shuffles the outputs the same way and nothing else.
perm = rng.permutation(5)
direct = scaled_dot_product_attention(q, k, v)[perm]
shuffled = scaled_dot_product_attention(q[perm], k[perm], v[perm])
print("permutation equivariance error:", float(np.abs(direct - shuffled).max()))

# Multi-head attention is just attention on contiguous column slices.
x = rng.standard_normal((5, 12)).astype(np.float32)
heads = split_heads(x, 3)
print("split 12 columns into", heads.shape, "(heads, tokens, head_dim)")
print("merge inverts split:", bool(np.array_equal(merge_heads(heads), x)))
