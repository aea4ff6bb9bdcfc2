import numpy as np
import pytest
from SteinFlow.core.errors import DomainError
from SteinFlow.grid.grids import Grid1D, GridFunction
from SteinFlow.grid.stencils import (
    fd_gradient,
    fd_laplacian,
    fd_laplacian_1d,
    fd_laplacian_2d,
    interpolate,
    interpolate_stack,
)


@pytest.fixture
def grid():
    return Grid1D(-2.0, 2.0, 41)


class TestLaplacian:
    def test_quadratic_1d(self, grid):
        f = GridFunction(grid, grid.nodes**2)
        lap = fd_laplacian_1d(f)
        np.testing.assert_allclose(lap.values[1:-1], 2.0, rtol=1e-10)

    def test_quadratic_2d(self, grid, small_grid2d):
        points = small_grid2d.points
        f = GridFunction(small_grid2d, (points**2).sum(axis=1))
        lap = fd_laplacian(f)
        np.testing.assert_allclose(lap.values[1:-1, 1:-1], 4.0, rtol=1e-10)
        with pytest.raises(ValueError):
            fd_laplacian_2d(GridFunction(grid, grid.nodes**2))

    def test_neumann_constant(self, grid):
        f = GridFunction(grid, np.full(grid.n, 3.0))
        np.testing.assert_allclose(fd_laplacian(f).values, 0.0, atol=1e-12)

    def test_symmetric(self, grid, rng):
        # <Lf, g> = <f, Lg> with edge ghost cells
        f = GridFunction(grid, rng.normal(size=grid.n))
        g = GridFunction(grid, rng.normal(size=grid.n))
        lhs = grid.inner(fd_laplacian(f).values, g.values)
        rhs = grid.inner(f.values, fd_laplacian(g).values)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_vector_rejected(self, grid):
        with pytest.raises(ValueError):
            fd_laplacian_1d(GridFunction(grid, np.zeros((1, grid.n))))


class TestGradient:
    def test_quadratic_1d(self, grid):
        grad = fd_gradient(GridFunction(grid, grid.nodes**2))
        assert grad.is_vector
        np.testing.assert_allclose(grad.values[0], 2.0 * grid.nodes, atol=1e-10)

    def test_component_order_2d(self, small_grid2d):
        points = small_grid2d.points
        f = GridFunction(small_grid2d, 3.0 * points[:, 0] - points[:, 1])
        grad = fd_gradient(f)
        np.testing.assert_allclose(grad.values[0], 3.0, atol=1e-10)
        np.testing.assert_allclose(grad.values[1], -1.0, atol=1e-10)


class TestInterpolation:
    def test_midpoint(self, grid, rng):
        f = GridFunction(grid, rng.normal(size=grid.n))
        mid = 0.5 * (grid.nodes[10] + grid.nodes[11])
        assert interpolate(f, mid) == pytest.approx(
            0.5 * (f.values[10] + f.values[11])
        )

    def test_nodes_exact(self, grid):
        f = GridFunction(grid, np.sin(grid.nodes))
        np.testing.assert_allclose(interpolate(f, grid.nodes), f.values)

    def test_bilinear_exact(self, small_grid2d, rng):
        points = small_grid2d.points
        f = GridFunction(small_grid2d, 1.0 + 2.0 * points[:, 0] + 0.5 * points[:, 1])
        x = rng.uniform(-4.0, 4.0, size=(20, 2))
        np.testing.assert_allclose(
            interpolate(f, x), 1.0 + 2.0 * x[:, 0] + 0.5 * x[:, 1], atol=1e-10
        )

    @pytest.mark.parametrize("x", [-2.5, 2.0 + 1e-6, [0.0, 3.0]])
    def test_outside(self, grid, x):
        f = GridFunction(grid, np.zeros(grid.n))
        with pytest.raises(DomainError):
            interpolate(f, x)

    def test_stack(self, grid):
        values = np.stack([grid.nodes, 2.0 * grid.nodes])
        result = interpolate_stack(grid, values, np.array([[0.05], [1.0]]))
        np.testing.assert_allclose(result, [[0.05, 1.0], [0.1, 2.0]], atol=1e-12)
