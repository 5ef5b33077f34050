import numpy as np
import pytest

from localsyn.plant import FIG3_PARAMS


@pytest.fixture
def p():
    return FIG3_PARAMS


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
