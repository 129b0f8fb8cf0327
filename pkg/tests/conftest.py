import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kinavg.littlewood_paley import DyadicCutoffs
from kinavg.spectral_core import GridSpec

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cutoffs():
    return DyadicCutoffs()


@pytest.fixture(scope="session")
def grid_small():
    return GridSpec(1, 64, 2 * math.pi)


@pytest.fixture(scope="session")
def grid_mid():
    return GridSpec(1, 128, 2 * math.pi * 4)


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol
