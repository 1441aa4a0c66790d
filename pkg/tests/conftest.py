import numpy as np
import pytest

from homroll.spaces import make_group_as_reductive, make_so_n, make_sphere, make_stiefel


def random_skew(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    return scale * (A - A.T) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def so3():
    return make_so_n(3)


@pytest.fixture(scope="session")
def so3_space(so3):
    return make_group_as_reductive(so3)


@pytest.fixture(scope="session")
def sphere():
    return make_sphere(3)


@pytest.fixture(scope="session")
def st42():
    return make_stiefel(4, 2, 1.0)
