from __future__ import annotations

import enum
import math

import numpy as np

from ..errors import ConfigError, NumericError, UsageError
from .layers import Layer, layer_from_spec
from .tensor import Tensor


class Mode(enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


class Network:
    """Sequential dense network with a single-use backward tape.

    All trainable parameters live in one contiguous float64 vector
    (``flat``) with a parallel gradient vector (``flat_grad``); the per-layer
    :class:`Tensor` objects are views into them. Non-trainable state
    (BatchNorm running statistics) lives in ``flat_buffers``.
    """

    def __init__(self, layers: list[Layer], rng=None):
        if not layers:
            raise ConfigError("a network needs at least one layer")
        self.layers = list(layers)
        self.in_width, self.out_width = self._check_widths()

        shapes = [s for layer in self.layers for s in layer.param_shapes()]
        total = sum(r * c for r, c in shapes)
        self.flat = np.zeros(total)
        self.flat_grad = np.zeros(total)
        self.parameters: list[Tensor] = []
        offset = 0
        for i, layer in enumerate(self.layers):
            layer.params = []
            for j, (r, c) in enumerate(layer.param_shapes()):
                n = r * c
                t = Tensor(
                    self.flat[offset : offset + n].reshape(r, c),
                    grad=self.flat_grad[offset : offset + n].reshape(r, c),
                    name=f"{i}.{layer.kind}.{j}",
                )
                layer.params.append(t)
                self.parameters.append(t)
                offset += n

        bshapes = [s for layer in self.layers for s in layer.buffer_shapes()]
        self.flat_buffers = np.zeros(sum(r * c for r, c in bshapes))
        offset = 0
        for layer in self.layers:
            layer.buffers = []
            for r, c in layer.buffer_shapes():
                layer.buffers.append(self.flat_buffers[offset : offset + r * c].reshape(r, c))
                offset += r * c
            layer.init_buffers()

        self.mode = Mode.TRAIN
        self._tape = None
        if rng is not None:
            self.initialize(rng)

    def _check_widths(self) -> tuple[int, int]:
        first = last = None
        for layer in self.layers:
            width_in = layer.in_width if layer.in_width is not None else getattr(layer, "width", None)
            if width_in is not None:
                if last is not None and width_in != last:
                    raise ConfigError(
                        f"layer {layer!r} expects width {width_in} but receives {last}"
                    )
                if first is None:
                    first = width_in
            if layer.out_width is not None:
                last = layer.out_width
            elif width_in is not None:
                last = width_in
        if first is None or last is None:
            raise ConfigError("network widths are undetermined (no Linear or norm layer)")
        return first, last

    @classmethod
    def from_spec(cls, specs: list[dict], rng=None) -> Network:
        return cls([layer_from_spec(s) for s in specs], rng=rng)

    def spec(self) -> list[dict]:
        return [layer.spec() for layer in self.layers]

    def initialize(self, rng) -> None:
        for layer in self.layers:
            layer.init_params(rng)

    @property
    def num_parameters(self) -> int:
        return self.flat.size

    def train(self) -> Network:
        self.mode = Mode.TRAIN
        return self

    def eval(self) -> Network:
        self.mode = Mode.EVAL
        return self

    def copy_from(self, other: Network) -> None:
        if other.flat.shape != self.flat.shape or other.flat_buffers.shape != self.flat_buffers.shape:
            raise ConfigError("cannot copy between networks of different architecture")
        self.flat[...] = other.flat
        self.flat_buffers[...] = other.flat_buffers

    def clone(self) -> Network:
        twin = Network.from_spec(self.spec())
        twin.copy_from(self)
        twin.mode = self.mode
        return twin

    def forward(self, x, rng=None, *, dropout: bool | None = None) -> np.ndarray:
        """Run the batch ``x`` (rows are samples) through the network.

        ``dropout`` defaults to the network mode (active in Train). Normalization
        layers follow the mode regardless. The computation is recorded for one
        subsequent :meth:`backward`.
        """
        if isinstance(x, Tensor):
            x = x.value
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_width:
            raise ConfigError(f"input shape {x.shape} incompatible with in_width {self.in_width}")
        # A sum is non-finite iff some entry is (barring overflow of huge inputs).
        if not math.isfinite(np.add.reduce(x, axis=None)):
            raise NumericError("non-finite network input")
        train = self.mode is Mode.TRAIN
        if dropout is None:
            dropout = train
        elif dropout and not train:
            raise UsageError("dropout cannot be active in Eval mode")

        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, train=train, dropout=dropout, rng=rng)
            caches.append(cache)
        self._tape = (caches, x.shape)
        return x

    __call__ = forward

    def backward(self, output_grad, *, param_grads: bool = True, input_grad: bool = False):
        """Back-propagate ``output_grad`` through the last forward.

        Parameter gradients are written (not accumulated) into ``flat_grad``.
        Returns the gradient with respect to the input when ``input_grad``.
        """
        if self._tape is None:
            raise UsageError("backward requires a fresh forward (tape is empty or consumed)")
        caches, out_shape = self._tape
        self._tape = None
        if isinstance(output_grad, Tensor):
            output_grad = output_grad.value
        g = np.asarray(output_grad, dtype=np.float64)
        if g.shape != out_shape:
            raise ConfigError(f"output_grad shape {g.shape} != output shape {out_shape}")
        for i in range(len(self.layers) - 1, -1, -1):
            need_dx = i > 0 or input_grad
            g = self.layers[i].backward(g, caches[i], param_grads=param_grads, input_grad=need_dx)
        return g

    def __repr__(self) -> str:
        inner = " -> ".join(repr(layer) for layer in self.layers)
        return f"Network[{inner}]"
