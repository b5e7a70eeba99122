import numpy as np
import pytest

from mixedsdde.grid import SamplePath, TimeGrid
from mixedsdde.paths import FbmParams, generate_fbm


@pytest.fixture
def unit_grid():
    return TimeGrid(0.0, 1.0, 1024)


@pytest.fixture
def linear_path(unit_grid):
    return SamplePath.from_function(unit_grid, lambda t: t)


@pytest.fixture(scope="session")
def fbm_14():
    grid = TimeGrid(0.0, 1.0, 2**14)
    return generate_fbm(grid, FbmParams(0.75, seed=20240))


def random_walk(grid, seed, dims=1):
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal((grid.n_steps, dims)) * np.sqrt(grid.dt)
    return SamplePath(grid, np.vstack([np.zeros((1, dims)), np.cumsum(steps, axis=0)]))
