import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from snaketeleop import make_params


@pytest.fixture
def params4():
    return make_params(n=4, h=0.01)


@pytest.fixture
def params6():
    return make_params(n=6, h=0.01)


@pytest.fixture
def params8():
    return make_params(n=8, h=0.01)


@pytest.fixture
def params30():
    return make_params(n=30, h=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_q(rng, params, feed=None):
    q = rng.uniform(params.q_min, params.q_max)
    if feed is not None:
        q[0] = feed
    return q
