import numpy as np
import pytest

from memwave.params import ModelParams


@pytest.fixture
def params1():
    return ModelParams(sigma=1.0, n=1, m=1.0, p=2.0)


@pytest.fixture
def params2():
    return ModelParams(sigma=2.0, n=1, m=1.0, p=6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
