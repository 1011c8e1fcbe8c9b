import math

import numpy as np
import pytest
from scipy import integrate

from droq_lab.autodiff import Adam
from droq_lab.policy import SquashedGaussianPolicy, Temperature, update_temperature
from droq_lab.rng import RandomStream


def fixed_policy(mu, log_std, obs_dim=1):
    """1-D policy whose heads ignore the observation: (mu, log_std) come from the bias."""
    pol = SquashedGaussianPolicy(obs_dim, 1, hidden_width=4, hidden_layers=1, rng=RandomStream(0))
    last = pol.net.layers[-1]
    w, b = last.params
    w.value[...] = 0.0
    b.value[...] = [[mu, log_std]]
    return pol


def log_density(pol, actions):
    """log pi(a) at given actions, by inverting the squashing for the noise."""
    out = pol.net.forward(np.zeros((1, pol.obs_dim)))
    pol.net._tape = None
    mu, log_std = out[0, 0], np.clip(out[0, 1], -20, 2)
    noise = (np.arctanh(actions) - mu) / np.exp(log_std)
    obs = np.zeros((len(actions), pol.obs_dim))
    return pol.rsample(obs, noise=noise[:, None]).log_prob


def test_actions_strictly_inside_unit_box():
    pol = SquashedGaussianPolicy(3, 2, 16, 2, rng=RandomStream(1))
    obs = np.random.default_rng(0).standard_normal((100_000, 3)) * 5
    a, logp = pol.sample(obs, RandomStream(2))
    assert np.all(np.abs(a) < 1.0)
    assert np.all(np.isfinite(logp))
    saturated = fixed_policy(30.0, 2.0)
    a, logp = saturated.sample(np.zeros((10_000, 1)), RandomStream(3))
    assert np.all(np.abs(a) < 1.0) and np.all(np.isfinite(logp))


def test_small_sigma_limit_is_tanh_mu():
    pol = fixed_policy(0.7, -50.0)
    a, _ = pol.sample(np.zeros((1000, 1)), RandomStream(0))
    assert np.max(np.abs(a - math.tanh(0.7))) < 1e-6


def test_density_matches_histogram():
    pol = fixed_policy(0.0, 0.0)
    a, _ = pol.sample(np.zeros((1_000_000, 1)), RandomStream(5))
    counts, edges = np.histogram(a[:, 0], bins=200, range=(-1.0, 1.0))
    width = edges[1] - edges[0]
    centres = 0.5 * (edges[1:] + edges[:-1])
    empirical = counts / (counts.sum() * width)
    # Average the model density across each bin; it varies quickly near +-1.
    offsets = (np.arange(16) + 0.5) / 16 - 0.5
    points = (centres[:, None] + width * offsets[None, :]).reshape(-1)
    model = np.exp(log_density(pol, points)).reshape(len(centres), -1).mean(axis=1)
    busy = counts > 1000
    assert busy.sum() > 100
    rel = np.abs(empirical[busy] - model[busy]) / model[busy]
    assert rel.max() < 0.05


@pytest.mark.parametrize("mu,log_std", [(0.0, 0.0), (0.3, math.log(0.8)), (-1.0, math.log(0.3))])
def test_density_integrates_to_one(mu, log_std):
    pol = fixed_policy(mu, log_std)

    def density(a):
        return float(np.exp(log_density(pol, np.array([a])))[0])

    total, _ = integrate.quad(density, -1 + 1e-12, 1 - 1e-12, limit=200)
    assert abs(total - 1.0) < 1e-3


def test_log_prob_finite_for_huge_observations():
    pol = SquashedGaussianPolicy(3, 2, 16, 2, rng=RandomStream(1))
    gen = np.random.default_rng(0)
    obs = gen.uniform(-1e6, 1e6, (1000, 3))
    _, logp = pol.sample(obs, RandomStream(2))
    assert np.all(np.isfinite(logp))


def test_reparameterised_mean_gradient_matches_finite_differences():
    pol = fixed_policy(0.2, math.log(0.5))
    obs = np.zeros((20_000, 1))
    noise = np.random.default_rng(4).standard_normal((20_000, 1))
    sample = pol.rsample(obs, noise=noise)
    n = len(obs)
    pol.backward(sample, np.full((n, 1), 1.0 / n), np.zeros(n))
    bias = pol.net.layers[-1].params[1]
    analytic = bias.grad[0, 0]

    def mean_action():
        s = pol.rsample(obs, noise=noise)
        pol.net._tape = None
        return s.action.mean()

    h = 1e-5
    bias.value[0, 0] += h
    up = mean_action()
    bias.value[0, 0] -= 2 * h
    down = mean_action()
    bias.value[0, 0] += h
    assert abs(analytic - (up - down) / (2 * h)) < 1e-3


def test_policy_parameter_gradient_finite_differences():
    """Full loss mean(alpha * logp - Q(a)) with common random numbers."""
    pol = SquashedGaussianPolicy(2, 2, 8, 2, rng=RandomStream(3))
    obs = np.random.default_rng(0).standard_normal((32, 2))
    noise = np.random.default_rng(1).standard_normal((32, 2))
    alpha = 0.3
    target = np.array([0.2, -0.4])

    def loss_terms():
        s = pol.rsample(obs, noise=noise)
        q = -np.sum((s.action - target) ** 2, axis=1)
        return s, float(np.mean(alpha * s.log_prob - q))

    s, _ = loss_terms()
    n = len(obs)
    pol.backward(s, 2.0 * (s.action - target) / n, np.full(n, alpha / n))
    analytic = pol.net.flat_grad.copy()
    h = 1e-6
    for k in range(pol.net.flat.size):
        old = pol.net.flat[k]
        pol.net.flat[k] = old + h
        pol.net._tape = None
        up = loss_terms()[1]
        pol.net.flat[k] = old - h
        pol.net._tape = None
        down = loss_terms()[1]
        pol.net.flat[k] = old
        pol.net._tape = None
        numeric = (up - down) / (2 * h)
        assert abs(analytic[k] - numeric) <= 1e-4 * max(abs(numeric), 1.0)


def test_temperature_stationary_and_direction():
    temp = Temperature(target_entropy=-1.0)
    temp.update(np.array([1.0, 1.0]))
    assert temp.alpha == 1.0
    assert temp.gradient(np.array([0.5, 1.5])) == 0.0
    temp.update(np.array([2.0, 2.0]))
    assert temp.alpha > 1.0
    low = Temperature(target_entropy=-1.0)
    update_temperature(low, np.array([-3.0]))
    assert low.alpha < 1.0


def test_temperature_bandit_entropy_converges_to_target():
    """State-free bandit with reward -(a - 0.3)^2: entropy is driven to the target."""
    pol = fixed_policy(0.0, 0.0)
    optim = Adam.for_network(pol.net, lr=3e-3)
    temp = Temperature(target_entropy=-1.0, lr=3e-3)
    rng = RandomStream(8)
    obs = np.zeros((256, 1))
    n = len(obs)
    entropy = []
    for _ in range(10_000):
        s = pol.rsample(obs, rng)
        alpha = temp.alpha
        pol.backward(s, 2.0 * (s.action - 0.3) / n, np.full(n, alpha / n))
        optim.step_network(pol.net)
        temp.update(s.log_prob)
        entropy.append(-float(np.mean(s.log_prob)))
    running = float(np.mean(entropy[-1000:]))
    assert abs(running - (-1.0)) <= 0.2
