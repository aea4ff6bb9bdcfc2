import numpy as np
import pytest
import scipy.sparse as sp
from SteinFlow.core.errors import NumericError
from SteinFlow.grid.grids import Grid1D
from SteinFlow.spectral.schrodinger import (
    SchrodingerPotential,
    build_schrodinger_matrix,
    eigendecompose,
    schrodinger_potential,
)
from SteinFlow.targets.mixture import TargetDistribution, standard_gaussian


class TestSchrodingerPotential:
    def test_gaussian_1d(self, gaussian, wide_grid):
        vs = schrodinger_potential(gaussian, wide_grid)
        np.testing.assert_allclose(vs.values, wide_grid.nodes**2 / 4 - 0.5, atol=1e-12)

    def test_gaussian_2d(self, small_grid2d):
        vs = schrodinger_potential(standard_gaussian(2), small_grid2d)
        points = small_grid2d.points
        expected = (points**2).sum(axis=1).reshape(small_grid2d.shape) / 4 - 1.0
        np.testing.assert_allclose(vs.values, expected, atol=1e-12)

    def test_mixture_at_zero(self, mixture3):
        grid = Grid1D(-1.0, 1.0, 3)
        vs = schrodinger_potential(mixture3, grid)
        grad = mixture3.grad_potential(0.0)[0]
        lap = mixture3.laplacian_potential(0.0)
        assert vs.values[1] == pytest.approx(0.25 * grad**2 - 0.5 * lap)

    def test_non_finite(self):
        broken = TargetDistribution(
            1,
            lambda p: np.zeros(p.shape[0]),
            lambda p: np.where(p > 0.5, np.nan, p),
            lambda p: np.ones(p.shape[0]),
        )
        with pytest.raises(NumericError, match="node 3"):
            schrodinger_potential(broken, Grid1D(0.0, 1.0, 5))


class TestSchrodingerMatrix:
    def test_stencil(self):
        grid = Grid1D(0.0, 2.0, 3)
        matrix = build_schrodinger_matrix(SchrodingerPotential(grid, np.zeros(3)))
        np.testing.assert_allclose(
            matrix.toarray(), [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
        )

    def test_symmetric(self, mixture3, wide_grid):
        matrix = build_schrodinger_matrix(schrodinger_potential(mixture3, wide_grid))
        assert (matrix != matrix.T).nnz == 0

    def test_2d_diagonal(self, small_grid2d):
        vs = SchrodingerPotential(small_grid2d, np.zeros(small_grid2d.shape))
        matrix = build_schrodinger_matrix(vs)
        assert matrix.shape == (small_grid2d.n_nodes,) * 2
        np.testing.assert_allclose(matrix.diagonal(), 4.0 / small_grid2d.spacing**2)
        # five-point stencil
        assert matrix[40].nnz == 5


class TestEigendecompose:
    def test_three_by_three(self):
        matrix = sp.diags([[-1, -1], [2, 2, 2], [-1, -1]], [-1, 0, 1])
        eigenvalues, eigenvectors = eigendecompose(matrix, 3)
        np.testing.assert_allclose(
            eigenvalues, [2 - np.sqrt(2), 2, 2 + np.sqrt(2)], atol=1e-10
        )
        np.testing.assert_allclose(np.linalg.norm(eigenvectors, axis=0), 1.0)

    def test_identity(self):
        eigenvalues, _ = eigendecompose(sp.identity(4), 2)
        np.testing.assert_allclose(eigenvalues, [1.0, 1.0])

    def test_dense_path(self, rng):
        a = rng.normal(size=(30, 30))
        a = a + a.T
        eigenvalues, _ = eigendecompose(a, 5)
        np.testing.assert_allclose(eigenvalues, np.linalg.eigvalsh(a)[:5], atol=1e-10)

    @pytest.mark.parametrize("k", [0, 4, 2.5])
    def test_invalid_k(self, k):
        with pytest.raises(ValueError):
            eigendecompose(sp.identity(3), k)

    def test_not_symmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            eigendecompose(np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), 1)

    def test_gaussian_spectrum(self, gaussian, wide_grid):
        matrix = build_schrodinger_matrix(schrodinger_potential(gaussian, wide_grid))
        eigenvalues, _ = eigendecompose(matrix, 4)
        assert eigenvalues[0] == pytest.approx(0.0, abs=1e-2)
        np.testing.assert_allclose(eigenvalues[1:], [1.0, 2.0, 3.0], rtol=2e-2)
