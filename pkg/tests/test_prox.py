import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcmirror.errors import DomainError, InvalidInputError
from qcmirror.geometry import NormKind, norm
from qcmirror.prox import ProxSetup, strong_convexity_gap, theta0_is_honest


def test_bregman_examples():
    e = ProxSetup.euclidean_box([-10, -10], [10, 10])
    assert e.bregman([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert e.bregman([0.0, 0.0], [3.0, 4.0]) == 12.5
    s = ProxSetup.entropy_simplex(2)
    expected = 0.25 * math.log(0.5) + 0.75 * math.log(1.5)
    assert s.bregman([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.130812, abs=1e-6)
    assert expected >= 0.5 * norm([0.25, -0.25], NormKind.L1) ** 2


def test_entropy_zero_coordinate_is_domain_error():
    s = ProxSetup.entropy_simplex(2)
    with pytest.raises(DomainError):
        s.bregman([1.0, 0.0], [0.5, 0.5])


def test_mirror_step_examples():
    big = ProxSetup.euclidean_box([-1e6, -1e6], [1e6, 1e6])
    assert np.allclose(big.mirror_step([1.0, 1.0], [1.0, 0.0], 0.5), [0.5, 1.0])
    ball = ProxSetup.euclidean_ball([0.0, 0.0], 1.0)
    assert np.allclose(ball.mirror_step([1.0, 0.0], [-2.0, 0.0], 1.0), [1.0, 0.0])
    s = ProxSetup.entropy_simplex(2)
    assert np.allclose(s.mirror_step([0.5, 0.5], [math.log(2), 0.0], 1.0), [1 / 3, 2 / 3], atol=1e-15)


def test_mirror_step_rejects_bad_input():
    s = ProxSetup.euclidean_box([0.0], [1.0])
    with pytest.raises(InvalidInputError):
        s.mirror_step([0.5], [1.0], 0.0)
    with pytest.raises((InvalidInputError, DomainError)):
        s.mirror_step([2.0], [1.0], 0.1)


def test_start_point_examples():
    assert np.allclose(ProxSetup.entropy_simplex(3).start_point(), [1 / 3] * 3)
    assert np.allclose(ProxSetup.euclidean_box([0, 0], [1, 1]).start_point(), [0, 0])
    ball = ProxSetup.euclidean_ball([2.0, 0.0], 1.0, prox_center=[0.0, 0.0])
    assert np.allclose(ball.start_point(), [1.0, 0.0])


def test_start_point_minimises_d(rng):
    for setup in _setups(3):
        x0 = setup.start_point()
        for _ in range(200):
            u = _random_point(rng, setup)
            assert setup.d(u) >= setup.d(x0) - 1e-12


def _setups(n):
    return [
        ProxSetup.euclidean_box([-1.0] * n, [2.0] * n, center=[0.5] * n),
        ProxSetup.euclidean_ball([0.3] * n, 1.5),
        ProxSetup.entropy_simplex(n),
    ]


def _random_point(rng, setup):
    fs = setup.feasible_set
    if setup.is_entropy:
        return rng.dirichlet(np.ones(setup.dim))
    lo, hi = fs.bounding_box()
    return fs.project(rng.uniform(lo, hi))


@settings(max_examples=40)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_first_order_optimality_of_mirror_step(n, seed):
    rng = np.random.default_rng(seed)
    for setup in _setups(n):
        x = _random_point(rng, setup)
        p = rng.normal(size=n) * 3
        h = rng.uniform(0.01, 1.0)
        z = setup.mirror_step(x, p, h)
        assert setup.feasible_set.contains(z)
        grad = h * p + setup.grad_d(z) - setup.grad_d(x)
        for _ in range(20):
            u = _random_point(rng, setup)
            assert grad @ (u - z) >= -1e-7


@settings(max_examples=40)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_strong_convexity(n, seed):
    rng = np.random.default_rng(seed)
    for setup in _setups(n):
        x, y = _random_point(rng, setup), _random_point(rng, setup)
        assert setup.bregman(x, y) >= 0.5 * norm(x - y, setup.norm) ** 2 - 1e-9
        assert strong_convexity_gap(setup, x, y) >= -1e-9
        assert setup.bregman(x, x) == pytest.approx(0.0, abs=1e-15)


def test_entropy_iterates_sum_to_one(rng):
    s = ProxSetup.entropy_simplex(3)
    x = s.start_point()
    for _ in range(500):
        x = s.mirror_step(x, rng.normal(size=3) * 50, 1.0)
        assert abs(x.sum() - 1.0) <= 1e-15 and np.all(x > 0)


def test_theta0_honesty():
    s = ProxSetup.euclidean_box([-1.0], [1.0], center=[-1.0])
    assert theta0_is_honest(s, [0.0], math.sqrt(0.5))
    assert not theta0_is_honest(s, [0.0], 0.7)
