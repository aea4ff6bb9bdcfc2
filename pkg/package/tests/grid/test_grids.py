import numpy as np
import pytest
from SteinFlow.core.errors import InvalidSpecError, NumericError
from SteinFlow.grid.grids import (
    Grid1D,
    Grid2D,
    GridDensity,
    GridFunction,
    as_points,
    make_grid,
)


class TestGrid1D:
    def test_nodes(self):
        grid = Grid1D(-1.0, 1.0, 5)
        assert grid.spacing == pytest.approx(0.5)
        np.testing.assert_allclose(grid.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])
        assert grid.shape == (5,)
        assert grid.points.shape == (5, 1)
        assert np.all(np.diff(grid.nodes) > 0)

    @pytest.mark.parametrize(
        ("lower", "upper", "n"),
        [
            (1.0, 1.0, 10),
            (2.0, 1.0, 10),
            (0.0, 1.0, 2),
            (0.0, np.inf, 10),
            (0.0, 1.0, 10.5),
            (0.0, 1.0, True),
        ],
    )
    def test_invalid(self, lower, upper, n):
        with pytest.raises(InvalidSpecError):
            Grid1D(lower, upper, n)

    def test_quadrature(self):
        grid = Grid1D(0.0, 1.0, 11)
        assert grid.integrate(np.ones(11)) == pytest.approx(1.1)
        assert grid.cell_volume == pytest.approx(0.1)

    def test_clamp(self):
        grid = Grid1D(-1.0, 1.0, 5)
        clamped, n_clamped = grid.clamp(np.array([[-2.0], [0.3], [1.5]]))
        np.testing.assert_allclose(clamped[:, 0], [-1.0, 0.3, 1.0])
        assert n_clamped == 2

    def test_equality(self):
        assert Grid1D(0, 1, 5) == Grid1D(0.0, 1.0, 5)
        assert Grid1D(0, 1, 5) != Grid1D(0, 1, 6)


class TestGrid2D:
    def test_row_major_points(self):
        grid = Grid2D(Grid1D(0.0, 3.0, 4), Grid1D(0.0, 2.0, 3))
        assert grid.shape == (3, 4)
        points = grid.points
        # flat index iy * nx + ix
        np.testing.assert_allclose(points[1], [1.0, 0.0])
        np.testing.assert_allclose(points[4], [0.0, 1.0])
        assert grid.cell_volume == pytest.approx(1.0)

    def test_unequal_spacing(self):
        with pytest.raises(InvalidSpecError):
            Grid2D(Grid1D(0.0, 1.0, 3), Grid1D(0.0, 1.0, 5))

    def test_make_grid(self):
        grid = make_grid(
            [{"lower": -6, "upper": 6, "n": 128}, {"lower": -6, "upper": 6, "n": 128}]
        )
        assert isinstance(grid, Grid2D)
        assert grid.n_nodes == 128 * 128
        assert make_grid({"lower": -14, "upper": 14, "n": 256}) == Grid1D(-14, 14, 256)

    @pytest.mark.parametrize(
        "spec", [{"lower": 0, "upper": 1}, [{"lower": 0, "upper": 1, "n": 3}] * 3, 5]
    )
    def test_make_grid_invalid(self, spec):
        with pytest.raises(InvalidSpecError):
            make_grid(spec)


class TestGridFunction:
    def test_shapes(self, small_grid2d):
        scalar = GridFunction(small_grid2d, np.zeros(small_grid2d.n_nodes))
        assert scalar.values.shape == small_grid2d.shape
        assert not scalar.is_vector
        vector = GridFunction(small_grid2d, np.zeros((2, *small_grid2d.shape)))
        assert vector.is_vector

    def test_non_finite(self):
        grid = Grid1D(0.0, 1.0, 4)
        with pytest.raises(NumericError):
            GridFunction(grid, [0.0, np.nan, 1.0, 2.0])

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            GridFunction(Grid1D(0.0, 1.0, 4), np.zeros(5))

    def test_density(self):
        grid = Grid1D(0.0, 1.0, 11)
        density = GridDensity.normalized(grid, np.arange(11.0))
        assert density.mass == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(NumericError):
            GridDensity(grid, np.full(11, -1.0))
        with pytest.raises(NumericError):
            GridDensity.normalized(grid, np.zeros(11))


@pytest.mark.parametrize(
    ("x", "dimension", "shape", "single"),
    [
        (0.5, 1, (1, 1), True),
        ([0.5, 1.0], 1, (2, 1), False),
        ([0.5, 1.0], 2, (1, 2), True),
        (np.zeros((4, 2)), 2, (4, 2), False),
    ],
)
def test_as_points(x, dimension, shape, single):
    points, is_single = as_points(x, dimension)
    assert points.shape == shape
    assert is_single is single
