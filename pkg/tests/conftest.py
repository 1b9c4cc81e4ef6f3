import numpy as np
import pytest

from fbmchar import TimeGrid, SamplePath, generate_davies_harte


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def grid_1024():
    return TimeGrid(1.0, 1024)


@pytest.fixture(scope="session")
def fbm_path_07_4096():
    """One fBm path at H = 0.7 on a 4096-step unit grid."""
    grid = TimeGrid(1.0, 4096)
    return generate_davies_harte(grid, 0.7, 7, 1).paths[0]


def linear_path(grid: TimeGrid, slope: float = 1.0, role: str = "X") -> SamplePath:
    return SamplePath(grid, slope * grid.points, role)
