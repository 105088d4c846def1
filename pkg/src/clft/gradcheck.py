"""Finite-difference verification of analytic gradients for the core ops.

Each checked op gets a small float64 problem instance, a scalar loss, an
analytic gradient, and a central-difference numeric gradient. The loss is
a fixed random linear functional of the op output, ``sum(r * f(inputs))``
with ``r`` drawn from the same seeded generator as the inputs: a plain
output sum would be blind to softmax and layer_norm, whose outputs sum to
a constant along the normalized axis.

Reported ``max_rel_error`` is the worst absolute disagreement divided by
the largest gradient magnitude seen on either side (floored at 1e-12), so
an all-zero gradient pair compares as exactly equal instead of 0/0.
"""

from dataclasses import dataclass

import numpy as np

from clft.tensor_ops import gelu, layer_norm, softmax

OP_IDS = ("linear", "softmax", "gelu", "layer_norm", "sdpa")

STEP = 1e-3
_LN_EPS = 1e-6
_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class GradReport:
    op_name: str
    max_rel_error: float
    max_abs_error: float
    passed: bool


def _make_linear(rng):
    x = rng.standard_normal((4, 6))
    w = rng.standard_normal((6, 5))
    b = rng.standard_normal(5)
    return [x, w, b]


def _fwd_linear(x, w, b):
    return x @ w + b


def _bwd_linear(r, x, w, b):
    return [r @ w.T, x.T @ r, r.sum(axis=0)]


def _make_softmax(rng):
    return [rng.standard_normal((5, 7))]


def _fwd_softmax(x):
    return softmax(x, axis=-1)


def _bwd_softmax(r, x):
    y = softmax(x, axis=-1)
    return [y * (r - np.sum(r * y, axis=-1, keepdims=True))]


def _make_gelu(rng):
    return [rng.standard_normal((6, 6))]


def _bwd_gelu(r, x):
    # d/dx [x * Phi(x)] = Phi(x) + x * phi(x)
    from scipy.special import erf

    cdf = 0.5 * (1.0 + erf(x / _SQRT2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return [r * (cdf + x * pdf)]


def _make_layer_norm(rng):
    x = rng.standard_normal((5, 8))
    gamma = rng.standard_normal(8)
    beta = rng.standard_normal(8)
    return [x, gamma, beta]


def _fwd_layer_norm(x, gamma, beta):
    return layer_norm(x, gamma, beta, eps=_LN_EPS)


def _bwd_layer_norm(r, x, gamma, beta):
    d = x.shape[-1]
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + _LN_EPS)
    normed = (x - mean) * inv_std
    g_normed = r * gamma
    gx = inv_std * (
        g_normed
        - g_normed.mean(axis=-1, keepdims=True)
        - normed * np.mean(g_normed * normed, axis=-1, keepdims=True)
    )
    g_gamma = np.sum(r * normed, axis=tuple(range(x.ndim - 1)))
    g_beta = np.sum(r, axis=tuple(range(x.ndim - 1)))
    assert g_gamma.shape == (d,)
    return [gx, g_gamma, g_beta]


def _make_sdpa(rng):
    q = rng.standard_normal((5, 4))
    k = rng.standard_normal((6, 4))
    v = rng.standard_normal((6, 5))
    return [q, k, v]


def _fwd_sdpa(q, k, v):
    scale = 1.0 / np.sqrt(q.shape[-1])
    p = softmax(q @ k.T * scale, axis=-1)
    return p @ v


def _bwd_sdpa(r, q, k, v):
    scale = 1.0 / np.sqrt(q.shape[-1])
    p = softmax(q @ k.T * scale, axis=-1)
    gv = p.T @ r
    gp = r @ v.T
    gs = p * (gp - np.sum(gp * p, axis=-1, keepdims=True))
    gq = gs @ k * scale
    gk = gs.T @ q * scale
    return [gq, gk, gv]


_OPS = {
    "linear": (_make_linear, _fwd_linear, _bwd_linear),
    "softmax": (_make_softmax, _fwd_softmax, _bwd_softmax),
    "gelu": (_make_gelu, lambda x: gelu(x), _bwd_gelu),
    "layer_norm": (_make_layer_norm, _fwd_layer_norm, _bwd_layer_norm),
    "sdpa": (_make_sdpa, _fwd_sdpa, _bwd_sdpa),
}


def numeric_gradients(forward, inputs, r, step=STEP):
    """Central-difference gradient of sum(r * forward(*inputs)) per input."""
    def loss(args):
        return float(np.sum(r * forward(*args)))

    grads = []
    for idx, base in enumerate(inputs):
        g = np.zeros_like(base)
        flat = g.reshape(-1)
        base_flat = base.reshape(-1)
        for j in range(base_flat.size):
            orig = base_flat[j]
            base_flat[j] = orig + step
            hi = loss(inputs)
            base_flat[j] = orig - step
            lo = loss(inputs)
            base_flat[j] = orig
            flat[j] = (hi - lo) / (2.0 * step)
        grads.append(g)
    return grads


def grad_check(op_id, seed=0, tolerance=1e-4):
    """Compare analytic and numeric gradients for one op on a seeded instance."""
    if op_id not in _OPS:
        raise ValueError(f"unknown op {op_id!r}; valid ops: {', '.join(OP_IDS)}")
    make, forward, backward = _OPS[op_id]
    rng = np.random.default_rng(seed)
    inputs = make(rng)
    out = forward(*inputs)
    r = rng.standard_normal(out.shape)
    analytic = backward(r, *inputs)
    numeric = numeric_gradients(forward, inputs, r)
    max_abs = 0.0
    scale = 1e-12
    for a, n in zip(analytic, numeric):
        max_abs = max(max_abs, float(np.max(np.abs(a - n), initial=0.0)))
        scale = max(scale, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(n), initial=0.0)))
    max_rel = max_abs / scale
    return GradReport(op_id, max_rel, max_abs, max_rel <= tolerance)


def run_all(tolerance=1e-4, seeds=range(10)):
    """Worst-case report per op across the given seeds, in OP_IDS order."""
    reports = []
    for op_id in OP_IDS:
        worst = None
        for seed in seeds:
            rep = grad_check(op_id, seed=seed, tolerance=tolerance)
            if worst is None or rep.max_rel_error > worst.max_rel_error:
                worst = rep
        reports.append(worst)
    return reports
