"""Compiled inner loops for the hot small-matrix operations.

At desk-scale widths (64 to 256) numpy spends most of its time in per-call
overhead, so layer normalization and the Adam update are fused into single
passes here. Every kernel reduces in a fixed sequential order, so results are
deterministic run to run.
"""

from __future__ import annotations

import math

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)


@_jit
def layer_norm_forward(x, gain, bias, eps):
    """Row-wise (x - mean) / sqrt(var + eps) * gain + bias; returns (out, xhat, inv_std)."""
    n, w = x.shape
    out = np.empty((n, w))
    xhat = np.empty((n, w))
    inv = np.empty((n, 1))
    for i in range(n):
        m = 0.0
        for j in range(w):
            m += x[i, j]
        m /= w
        v = 0.0
        for j in range(w):
            d = x[i, j] - m
            v += d * d
        s = 1.0 / math.sqrt(v / w + eps)
        inv[i, 0] = s
        for j in range(w):
            h = (x[i, j] - m) * s
            xhat[i, j] = h
            out[i, j] = h * gain[0, j] + bias[0, j]
    return out, xhat, inv


@_jit
def layer_norm_backward(g, xhat, inv, gain, dgain, dbias, param_grads, input_grad):
    """Gradients of layer_norm_forward.

    Writes d gain / d bias into ``dgain``/``dbias`` when ``param_grads`` and
    returns d input when ``input_grad`` (an empty array otherwise).
    """
    n, w = g.shape
    if param_grads:
        for j in range(w):
            dgain[0, j] = 0.0
            dbias[0, j] = 0.0
        for i in range(n):
            for j in range(w):
                dgain[0, j] += g[i, j] * xhat[i, j]
                dbias[0, j] += g[i, j]
    if not input_grad:
        return np.empty((0, w))
    dx = np.empty((n, w))
    for i in range(n):
        a = 0.0
        b = 0.0
        for j in range(w):
            d = g[i, j] * gain[0, j]
            dx[i, j] = d
            a += d
            b += d * xhat[i, j]
        a /= w
        b /= w
        s = inv[i, 0]
        for j in range(w):
            dx[i, j] = (dx[i, j] - a - xhat[i, j] * b) * s
    return dx


@_jit
def adam_update(params, grads, m, v, beta1, beta2, step_size, bias2_scale, eps):
    """One in-place Adam step over flat vectors.

    ``step_size`` is lr / (1 - beta1^t) and ``bias2_scale`` is 1 / sqrt(1 - beta2^t).
    """
    c1 = 1.0 - beta1
    c2 = 1.0 - beta2
    for k in range(params.size):
        gk = grads[k]
        mk = beta1 * m[k] + c1 * gk
        vk = beta2 * v[k] + c2 * (gk * gk)
        m[k] = mk
        v[k] = vk
        params[k] -= step_size * (mk / (math.sqrt(vk) * bias2_scale + eps))


@_jit
def polyak_update(target, online, rho):
    """target <- rho * target + (1 - rho) * online, in place."""
    c = 1.0 - rho
    for k in range(target.size):
        target[k] = rho * target[k] + c * online[k]


@_jit
def mean_std(x):
    """Mean and population standard deviation of a flat vector (two passes)."""
    n = x.size
    s = 0.0
    for k in range(n):
        s += x[k]
    m = s / n
    v = 0.0
    for k in range(n):
        d = x[k] - m
        v += d * d
    return m, math.sqrt(v / n)
