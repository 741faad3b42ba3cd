import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "ci", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

from deskdft.basis import load_basis, expand  # noqa: E402
from deskdft.molio import parse_xyz  # noqa: E402

from suites import FIXED_XYZ  # noqa: E402


@pytest.fixture(scope="session")
def sto3g():
    return load_basis("sto-3g")


@pytest.fixture(scope="session")
def basis631g():
    return load_basis("6-31g")


@pytest.fixture(scope="session")
def h2():
    return parse_xyz(FIXED_XYZ["h2"])


@pytest.fixture(scope="session")
def h2o():
    return parse_xyz(FIXED_XYZ["h2o"])


@pytest.fixture(scope="session")
def h2o_ao(h2o, sto3g):
    return expand(h2o, sto3g)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
