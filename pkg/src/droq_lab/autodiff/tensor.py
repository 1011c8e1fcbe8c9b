from __future__ import annotations

import numpy as np

from ..errors import ConfigError


class Tensor:
    """A dense 2-D float64 array with an optional gradient slot.

    Trainable parameters are Tensors whose ``value``/``grad`` are views into a
    network's flat parameter and gradient buffers, so optimizers and Polyak
    averaging can work on one contiguous vector.
    """

    __slots__ = ("value", "grad", "name")

    def __init__(self, value, grad=None, name: str = ""):
        value = np.asarray(value, dtype=np.float64)
        if value.ndim == 1:
            value = value.reshape(1, -1)
        if value.ndim != 2:
            raise ConfigError(f"Tensor must be 2-D, got shape {value.shape}")
        if grad is not None and np.shape(grad) != value.shape:
            raise ConfigError(f"grad shape {np.shape(grad)} != value shape {value.shape}")
        self.value = value
        self.grad = grad
        self.name = name

    @property
    def rows(self) -> int:
        return self.value.shape[0]

    @property
    def cols(self) -> int:
        return self.value.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def zero_grad(self) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        else:
            self.grad[...] = 0.0

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}({self.rows}x{self.cols})"
