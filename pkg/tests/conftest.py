import numpy as np
import pytest

from mimolab.antenna import Box, make_array, sample_pattern
from mimolab.sphere import build_grid
from mimolab.spread import random_scatterers, sample_finite_rank


@pytest.fixture(scope="session")
def grid8():
    return build_grid(8)


@pytest.fixture(scope="session")
def grid12():
    return build_grid(12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def small_pipeline(grid, N=2, M_T=4, M_R=4, seed=0, box=None):
    """TX/RX samples and a random rank-N spread on ``grid``."""
    box = box or Box.cube(1.0)
    env = random_scatterers(N, 2, np.random.default_rng(seed))
    tx = sample_pattern(make_array(box, M_T, "tx"), grid)
    rx = sample_pattern(make_array(box, M_R, "rx"), grid)
    return env, tx, rx, sample_finite_rank(env, grid)
