from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from . import kernels


class Adam:
    """Adam with bias correction over one flat parameter vector.

    ``step`` updates ``params`` in place. Networks expose their parameters as a
    single contiguous vector, so one optimizer instance serves a whole network.
    """

    def __init__(self, size: int, lr: float = 3e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    @classmethod
    def for_network(cls, net, **kwargs) -> Adam:
        return cls(net.num_parameters, **kwargs)

    def step(self, params: np.ndarray, grads: np.ndarray) -> None:
        if params.shape != self.m.shape or grads.shape != self.m.shape:
            raise ConfigError(
                f"Adam state has shape {self.m.shape}, got params {params.shape} grads {grads.shape}"
            )
        self.t += 1
        kernels.adam_update(
            params, grads, self.m, self.v, self.beta1, self.beta2,
            self.lr / (1.0 - self.beta1**self.t), 1.0 / np.sqrt(1.0 - self.beta2**self.t),
            self.eps,
        )

    def step_network(self, net) -> None:
        self.step(net.flat, net.flat_grad)

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {"m": self.m, "v": self.v, "t": np.array([self.t])}
