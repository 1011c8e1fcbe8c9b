"""Layer kinds for dense networks.

Each layer is stateless with respect to a particular forward call: ``forward``
returns the output together with a cache, and ``backward`` consumes that cache.
Trainable parameters are bound by the owning :class:`~droq_lab.autodiff.network.Network`
as views into its flat buffers.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, UsageError
from . import kernels
from .tensor import Tensor

LN_EPS = 1e-5
_sum = np.add.reduce


class Layer:
    kind = "layer"
    in_width: int | None = None
    out_width: int | None = None

    def __init__(self):
        self.params: list[Tensor] = []
        self.buffers: list[np.ndarray] = []

    def param_shapes(self) -> list[tuple[int, int]]:
        return []

    def buffer_shapes(self) -> list[tuple[int, int]]:
        return []

    def init_params(self, rng) -> None:
        pass

    def init_buffers(self) -> None:
        pass

    def forward(self, x, *, train, dropout, rng):
        raise NotImplementedError

    def backward(self, g, cache, *, param_grads, input_grad):
        raise NotImplementedError

    def spec(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.spec().items() if k != "kind")
        return f"{self.kind}({args})"


class Linear(Layer):
    kind = "Linear"

    def __init__(self, in_width: int, out_width: int):
        super().__init__()
        if in_width < 1 or out_width < 1:
            raise ConfigError(f"Linear widths must be positive, got {in_width}->{out_width}")
        self.in_width = int(in_width)
        self.out_width = int(out_width)

    def param_shapes(self):
        return [(self.in_width, self.out_width), (1, self.out_width)]

    def init_params(self, rng):
        bound = 1.0 / math.sqrt(self.in_width)
        w, b = self.params
        w.value[...] = rng.uniform(-bound, bound, w.shape)
        b.value[...] = rng.uniform(-bound, bound, b.shape)

    def forward(self, x, *, train, dropout, rng):
        w, b = self.params
        out = x @ w.value
        out += b.value
        return out, x

    def backward(self, g, x, *, param_grads, input_grad):
        w, b = self.params
        if param_grads:
            np.matmul(x.T, g, out=w.grad)
            _sum(g, axis=0, keepdims=True, out=b.grad)
        if input_grad:
            return g @ w.value.T
        return None

    def spec(self):
        return {"kind": self.kind, "in": self.in_width, "out": self.out_width}


class ReLU(Layer):
    kind = "ReLU"

    def forward(self, x, *, train, dropout, rng):
        out = np.maximum(x, 0.0)
        return out, out

    def backward(self, g, out, *, param_grads, input_grad):
        if input_grad:
            return g * (out > 0.0)
        return None


class Dropout(Layer):
    """Inverted dropout: kept units are scaled by 1/(1-rate) at train time."""

    kind = "Dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = float(rate)

    def forward(self, x, *, train, dropout, rng):
        if not dropout or self.rate == 0.0:
            return x, None
        if rng is None:
            raise UsageError("active dropout needs a RandomStream")
        dropped = rng.drop_indices(x.size, self.rate)
        out = np.multiply(x, 1.0 / (1.0 - self.rate), order="C")
        out.reshape(-1)[dropped] = 0.0
        return out, dropped

    def backward(self, g, dropped, *, param_grads, input_grad):
        if not input_grad:
            return None
        if dropped is None:
            return g
        out = np.multiply(g, 1.0 / (1.0 - self.rate), order="C")
        out.reshape(-1)[dropped] = 0.0
        return out

    def spec(self):
        return {"kind": self.kind, "rate": self.rate}


class _AffineNorm(Layer):
    """Shared gain/bias handling for the normalization layers."""

    def __init__(self, width: int):
        super().__init__()
        if width < 1:
            raise ConfigError(f"norm width must be positive, got {width}")
        self.width = int(width)

    def param_shapes(self):
        return [(1, self.width), (1, self.width)]

    def init_params(self, rng):
        gain, bias = self.params
        gain.value[...] = 1.0
        bias.value[...] = 0.0

    def _affine_backward(self, g, normed, param_grads):
        gain, bias = self.params
        if param_grads:
            _sum(g * normed, axis=0, keepdims=True, out=gain.grad)
            _sum(g, axis=0, keepdims=True, out=bias.grad)
        return g * gain.value

    def spec(self):
        return {"kind": self.kind, "width": self.width}


_MEAN_VECTORS: dict[int, np.ndarray] = {}


def _row_mean(x):
    """Mean over the last axis as a matrix product; faster than a reduction for small rows."""
    n = x.shape[-1]
    vec = _MEAN_VECTORS.get(n)
    if vec is None:
        vec = _MEAN_VECTORS[n] = np.full((n, 1), 1.0 / n)
    return x @ vec


def _row_normalize(x):
    xc = x - _row_mean(x)
    var = _row_mean(xc * xc)
    var += LN_EPS
    inv = 1.0 / np.sqrt(var)
    xc *= inv
    return xc, inv


def _row_normalize_backward(dxhat, xhat, inv):
    out = dxhat - _row_mean(dxhat)
    out -= xhat * _row_mean(dxhat * xhat)
    out *= inv
    return out


class LayerNorm(_AffineNorm):
    kind = "LayerNorm"

    def forward(self, x, *, train, dropout, rng):
        gain, bias = self.params
        out, xhat, inv = kernels.layer_norm_forward(x, gain.value, bias.value, LN_EPS)
        return out, (xhat, inv)

    def backward(self, g, cache, *, param_grads, input_grad):
        xhat, inv = cache
        gain, bias = self.params
        dx = kernels.layer_norm_backward(
            g, xhat, inv, gain.value, gain.grad, bias.grad, param_grads, input_grad
        )
        return dx if input_grad else None


class LayerNormNoVR(_AffineNorm):
    """Layer normalization that re-centres but does not divide by the std."""

    kind = "LayerNormNoVR"

    def forward(self, x, *, train, dropout, rng):
        gain, bias = self.params
        xc = x - _row_mean(x)
        out = xc * gain.value
        out += bias.value
        return out, xc

    def backward(self, g, xc, *, param_grads, input_grad):
        dxc = self._affine_backward(g, xc, param_grads)
        if input_grad:
            dxc -= _row_mean(dxc)
            return dxc
        return None


class GroupNorm(_AffineNorm):
    kind = "GroupNorm"

    def __init__(self, width: int, groups: int = 2):
        super().__init__(width)
        if groups < 1 or width % groups:
            raise ConfigError(f"GroupNorm width {width} not divisible by {groups} groups")
        self.groups = int(groups)

    def forward(self, x, *, train, dropout, rng):
        gain, bias = self.params
        n = x.shape[0]
        xg = x.reshape(n, self.groups, -1)
        xhat, inv = _row_normalize(xg)
        xhat = xhat.reshape(n, self.width)
        out = xhat * gain.value
        out += bias.value
        return out, (xhat, inv)

    def backward(self, g, cache, *, param_grads, input_grad):
        xhat, inv = cache
        dxhat = self._affine_backward(g, xhat, param_grads)
        if not input_grad:
            return None
        n = g.shape[0]
        shape = (n, self.groups, -1)
        dx = _row_normalize_backward(dxhat.reshape(shape), xhat.reshape(shape), inv)
        return dx.reshape(n, self.width)

    def spec(self):
        return {"kind": self.kind, "width": self.width, "groups": self.groups}


class BatchNorm(_AffineNorm):
    """Batch normalization over the batch axis.

    Train mode normalizes with batch statistics and updates the running
    estimates; Eval mode uses the running estimates and mutates nothing.
    """

    kind = "BatchNorm"

    def __init__(self, width: int, momentum: float = 0.99):
        super().__init__(width)
        self.momentum = float(momentum)

    def buffer_shapes(self):
        return [(1, self.width), (1, self.width)]

    def init_buffers(self):
        running_mean, running_var = self.buffers
        running_mean[...] = 0.0
        running_var[...] = 1.0

    def forward(self, x, *, train, dropout, rng):
        gain, bias = self.params
        running_mean, running_var = self.buffers
        if train:
            mu = x.mean(axis=0, keepdims=True)
            xc = x - mu
            var = np.mean(xc * xc, axis=0, keepdims=True)
            running_mean *= self.momentum
            running_mean += (1.0 - self.momentum) * mu
            running_var *= self.momentum
            running_var += (1.0 - self.momentum) * var
        else:
            xc = x - running_mean
            var = running_var
        inv = 1.0 / np.sqrt(var + LN_EPS)
        xhat = xc * inv
        out = xhat * gain.value
        out += bias.value
        return out, (xhat, inv, train)

    def backward(self, g, cache, *, param_grads, input_grad):
        xhat, inv, train = cache
        dxhat = self._affine_backward(g, xhat, param_grads)
        if not input_grad:
            return None
        if not train:
            return dxhat * inv
        return inv * (
            dxhat
            - dxhat.mean(axis=0, keepdims=True)
            - xhat * np.mean(dxhat * xhat, axis=0, keepdims=True)
        )

    def spec(self):
        return {"kind": self.kind, "width": self.width, "momentum": self.momentum}


LAYER_KINDS = {
    cls.kind: cls
    for cls in (Linear, ReLU, Dropout, LayerNorm, LayerNormNoVR, GroupNorm, BatchNorm)
}


def layer_from_spec(spec: dict) -> Layer:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in LAYER_KINDS:
        raise ConfigError(f"unknown layer kind {kind!r}")
    if kind == "Linear":
        return Linear(spec["in"], spec["out"])
    return LAYER_KINDS[kind](**spec)
