import numpy as np
import pytest

from qfreq.curve_eval import make_constant_curve, make_curve, make_f_eps, make_g_eps, make_power_curve
from qfreq.models.qpoint import QPoint

Z_LIST = (0.3 + 0j, -0.15 + 0.3j, -0.15 - 0.3j)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def sqrt_curve():
    """w^2 = z"""
    return make_power_curve(2, 1)


@pytest.fixture
def identity_curve():
    """w - z = 0"""
    return make_curve([[0, -1], [1, 0]])


@pytest.fixture
def constant_curve():
    return make_constant_curve(2)


@pytest.fixture
def g_curve():
    return make_g_eps(0.1)


@pytest.fixture
def f_curve():
    return make_f_eps(1e-3, Z_LIST)


@pytest.fixture
def shifted_sqrt_curve():
    """(w - z/2)^2 = z: the branches +-sqrt(z) + z/2"""
    return make_curve([[0, -1, 0.25], [0, -1, 0], [1, 0, 0]])


def random_qpoint(rng, q, n=2):
    return QPoint(values=rng.normal(size=(q, n)), q=q)
