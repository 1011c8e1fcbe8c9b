import numpy as np
import pytest

from droq_lab.rng import RandomStream


def finite_difference_check(net, x, rng_state=None, h=1e-6, input_grad=True, floor=1e-4):
    """Max relative error between backward() and central differences.

    The loss is sum(out * R) for a fixed random R. Dropout masks are replayed by
    cloning ``rng_state`` before every forward pass. Gradients smaller than
    ``floor`` are compared in absolute terms, since central differences of an
    exactly-zero gradient only return rounding noise.
    """
    def run():
        rng = rng_state.clone() if rng_state is not None else None
        return net.forward(x, rng)

    out = run()
    weights = np.random.default_rng(123).standard_normal(out.shape)
    dx = net.backward(weights, input_grad=input_grad)
    analytic = net.flat_grad.copy()

    def loss():
        value = run()
        net._tape = None
        return float(np.sum(value * weights))

    worst = 0.0
    for k in range(net.flat.size):
        old = net.flat[k]
        net.flat[k] = old + h
        up = loss()
        net.flat[k] = old - h
        down = loss()
        net.flat[k] = old
        numeric = (up - down) / (2 * h)
        worst = max(worst, _rel(analytic[k], numeric, floor))
    if input_grad:
        for idx in np.ndindex(*x.shape):
            old = x[idx]
            x[idx] = old + h
            up = loss()
            x[idx] = old - h
            down = loss()
            x[idx] = old
            worst = max(worst, _rel(dx[idx], (up - down) / (2 * h), floor))
    return worst


def _rel(a, n, floor):
    return abs(a - n) / max(abs(a), abs(n), floor)


@pytest.fixture
def rng():
    return RandomStream(2024)
