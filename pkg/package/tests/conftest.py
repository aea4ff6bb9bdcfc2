import numpy as np
import pytest
from SteinFlow.grid.grids import Grid1D, Grid2D
from SteinFlow.targets.mixture import (
    GaussianMixtureSpec,
    make_gaussian_mixture,
    normalized_pdf_on_grid,
    standard_gaussian,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def gaussian():
    return standard_gaussian(1)


@pytest.fixture(scope="session")
def mixture3_spec():
    return GaussianMixtureSpec(
        [0.4, 0.2, 0.4], [-3.0, 0.0, 4.0], [1.0, 1.0, 2.0]
    )


@pytest.fixture(scope="session")
def mixture3(mixture3_spec):
    return make_gaussian_mixture(mixture3_spec)


@pytest.fixture(scope="session")
def mixture2d():
    return make_gaussian_mixture(
        GaussianMixtureSpec(
            [0.5, 0.5], [[-1.0, -1.0], [1.0, 1.0]], [1.0, 1.0]
        )
    )


@pytest.fixture(scope="session")
def wide_grid():
    return Grid1D(-14.0, 14.0, 256)


@pytest.fixture(scope="module")
def gaussian_pdf(gaussian, wide_grid):
    return normalized_pdf_on_grid(gaussian, wide_grid)


@pytest.fixture(scope="session")
def small_grid2d():
    return Grid2D(Grid1D(-4.0, 4.0, 33), Grid1D(-4.0, 4.0, 33))
