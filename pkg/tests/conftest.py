import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from fixtures import lognormal_moments, normal_moments  # noqa: E402
from gns import build_gns_model  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope='session')
def normal16():
    return normal_moments(16)


@pytest.fixture(scope='session')
def normal16_model(normal16):
    return build_gns_model(normal16)


@pytest.fixture(scope='session')
def lognormal20():
    return lognormal_moments(20)


@pytest.fixture
def unit_grid():
    return np.linspace(0.0, 1.0, 101)
