"""
Shared fixtures for the momentum_margin tests
"""
import numpy as np
import pytest

from momentum_margin.core.config import SamplerConfig
from momentum_margin.core.lifting import QuadraticInstance
from momentum_margin.core.method_spec import FunctionClass, MethodSpec, preset
from momentum_margin.core.spectral_analysis import random_method

PRESET_NAMES = ["gradient-descent", "heavy-ball", "nesterov", "triple-momentum"]


@pytest.fixture
def fc_1_9():
    return FunctionClass(1.0, 9.0)


@pytest.fixture
def heavy_ball(fc_1_9):
    return preset("heavy-ball", fc_1_9)


@pytest.fixture
def gradient_quarter():
    """Gradient descent with step 0.25 (not the tuned 2/(m+L))."""
    return MethodSpec(k=1, l=0, alpha=[0.25], beta=[0.0], gamma=[1.0, 0.0], name="gd-0.25")


@pytest.fixture
def diag_1_9(fc_1_9):
    return QuadraticInstance(hessian=np.diag([1.0, 9.0]), minimizer=np.zeros(2), fc=fc_1_9)


@pytest.fixture
def shifted_1_9(fc_1_9):
    """Same Hessian as diag_1_9 with the minimizer away from the origin."""
    return QuadraticInstance(hessian=np.diag([1.0, 9.0]), minimizer=np.array([3.0, -2.0]), fc=fc_1_9)


def random_specs(count, seed, max_k=4, alpha_scale=1.0):
    """Valid random specs drawn with the lower-bound sampler."""
    config = SamplerConfig(max_k=max_k, alpha_scale=alpha_scale)
    return [random_method(np.random.default_rng([seed, i]), config) for i in range(count)]


def char_poly(matrix):
    """Characteristic polynomial coefficients (descending, monic) via Faddeev-LeVerrier."""
    n = matrix.shape[0]
    coeffs = [1.0]
    m_k = np.zeros_like(matrix)
    identity = np.eye(n)
    for k in range(1, n + 1):
        m_k = matrix @ m_k + coeffs[-1] * identity
        coeffs.append(-np.trace(matrix @ m_k) / k)
    return np.array(coeffs)


def matched_distance(a, b):
    """Largest distance between two eigenvalue multisets under the best one-to-one matching."""
    from scipy.optimize import linear_sum_assignment

    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    assert a.shape == b.shape
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
