#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.spectral.schrodinger` --- Schrödinger transform
=================================================================

The generator :math:`L = -\Delta + \langle \nabla V, \nabla \cdot \rangle`
is conjugate to :math:`-\Delta + V_S` with
:math:`V_S = \frac{1}{4}|\nabla V|^2 - \frac{1}{2}\Delta V`.  The discrete
operator uses the 3-point (1D) or 5-point (2D) stencil with homogeneous
Dirichlet closure, so the matrix is symmetric.
"""
from __future__ import annotations

import logging
from typing import Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from SteinFlow.core.consts import DENSE_EIGEN_MAX_NODES
from SteinFlow.core.errors import NumericError, SolverError
from SteinFlow.core.sftypes import FloatArray
from SteinFlow.grid.grids import Grid, GridFunction
from SteinFlow.targets.mixture import TargetDistribution

__all__ = [
    "SchrodingerPotential",
    "schrodinger_potential",
    "build_schrodinger_matrix",
    "eigendecompose",
    "RESIDUAL_TOL",
]

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8


class SchrodingerPotential(GridFunction):
    """Values of :math:`V_S` on the grid nodes."""


def schrodinger_potential(
    target: TargetDistribution, grid: Grid
) -> SchrodingerPotential:
    """Evaluate ``V_S = |∇V|²/4 - ΔV/2`` at every grid node."""
    points = grid.points
    grad = np.asarray(target.grad_potential(points)).reshape(-1, grid.dimension)
    lap = np.asarray(target.laplacian_potential(points)).reshape(-1)
    values = 0.25 * np.sum(grad**2, axis=1) - 0.5 * lap
    bad = ~np.isfinite(values)
    if np.any(bad):
        node = int(np.argmax(bad))
        raise NumericError(
            f"Non-finite potential derivatives at node {node} "
            f"({points[node].tolist()})"
        )
    return SchrodingerPotential(grid, values.reshape(grid.shape))


def _dirichlet_second_difference(n: int, spacing: float) -> sp.csr_matrix:
    main = np.full(n, 2.0 / spacing**2)
    off = np.full(n - 1, -1.0 / spacing**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def build_schrodinger_matrix(vs: SchrodingerPotential) -> sp.csr_matrix:
    """Sparse symmetric matrix of ``-Δ_ε + V_S`` with Dirichlet closure.

    1D: tridiagonal with diagonal ``2/ε² + V_S`` and off-diagonal ``-1/ε²``.
    2D: 5-point analogue with diagonal ``4/ε² + V_S`` in row-major node
    order."""
    grid = vs.grid
    h = grid.spacing
    if grid.dimension == 1:
        matrix = _dirichlet_second_difference(grid.n, h)
    else:
        ny, nx = grid.shape
        matrix = sp.kron(
            sp.identity(ny, format="csr"), _dirichlet_second_difference(nx, h)
        ) + sp.kron(
            _dirichlet_second_difference(ny, h), sp.identity(nx, format="csr")
        )
    matrix = matrix + sp.diags(vs.values.ravel(), 0)
    return sp.csr_matrix(matrix)


def _is_tridiagonal(matrix: sp.spmatrix) -> bool:
    coo = matrix.tocoo()
    return bool(np.all(np.abs(coo.row - coo.col) <= 1))


def _gershgorin_lower_bound(matrix: sp.csr_matrix) -> float:
    diag = matrix.diagonal()
    radius = np.asarray(abs(matrix).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - radius))


def eigendecompose(
    matrix: Union[sp.spmatrix, FloatArray], k: int, maxiter: int = None
) -> Tuple[FloatArray, FloatArray]:
    """Algebraically smallest `k` eigenpairs of a symmetric matrix.

    Tridiagonal matrices are solved with LAPACK's tridiagonal solver, other
    matrices densely when they have at most ``DENSE_EIGEN_MAX_NODES`` rows and
    with shift-invert implicitly restarted Lanczos (ARPACK) otherwise.

    :param matrix: symmetric (sparse) matrix
    :param k: number of eigenpairs, ``1 <= k <= n``
    :param maxiter: Lanczos iteration cap
    :return: ascending eigenvalues ``(k,)`` and unit eigenvectors as columns
        ``(n, k)``
    """
    matrix = sp.csr_matrix(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError(f"Expected a square matrix, found {matrix.shape}")
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise ValueError(f"Number of eigenpairs must be in [1, {n}], found {k}")
    k = int(k)
    asym = abs(matrix - matrix.T)
    if asym.nnz and asym.max() > 1e-12 * max(abs(matrix).max(), 1.0):
        raise ValueError("Matrix is not symmetric")
    if _is_tridiagonal(matrix):
        logger.debug(f"Tridiagonal eigensolve, n = {n}, k = {k}")
        eigenvalues, eigenvectors = eigh_tridiagonal(
            matrix.diagonal(),
            matrix.diagonal(1),
            select="i",
            select_range=(0, k - 1),
        )
    elif n <= DENSE_EIGEN_MAX_NODES:
        logger.debug(f"Dense eigensolve, n = {n}, k = {k}")
        eigenvalues, eigenvectors = eigh(
            matrix.toarray(), subset_by_index=[0, k - 1]
        )
    else:
        sigma = _gershgorin_lower_bound(matrix) - 1.0
        logger.finfo(
            f"Lanczos shift-invert eigensolve: n = {n}, k = {k}, "
            f"shift = {sigma:.3f}"
        )
        try:
            eigenvalues, eigenvectors = eigsh(
                matrix.tocsc(), k=k, sigma=sigma, which="LM", maxiter=maxiter
            )
        except ArpackNoConvergence as e:
            residual = None
            if e.eigenvalues.size:
                residual = float(
                    np.max(
                        np.linalg.norm(
                            matrix @ e.eigenvectors
                            - e.eigenvectors * e.eigenvalues,
                            axis=0,
                        )
                    )
                )
            raise SolverError(
                f"Lanczos did not converge: {e.eigenvalues.size} of {k} "
                "eigenpairs found",
                residual=residual,
            )
        except ArpackError as e:
            raise SolverError(f"Lanczos failed: {e}")
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = np.asarray(eigenvalues[order], dtype=np.float64)
    eigenvectors = np.asarray(eigenvectors[:, order], dtype=np.float64)
    eigenvectors /= np.linalg.norm(eigenvectors, axis=0)
    residuals = np.linalg.norm(
        matrix @ eigenvectors - eigenvectors * eigenvalues, axis=0
    )
    matrix_norm = float(np.max(np.asarray(abs(matrix).sum(axis=1))))
    if np.max(residuals) > RESIDUAL_TOL * matrix_norm:
        raise SolverError(
            f"Eigenpair residual exceeds {RESIDUAL_TOL:.0e}·‖A‖∞ "
            f"(‖A‖∞ = {matrix_norm:.3e})",
            residual=float(np.max(residuals)),
        )
    return eigenvalues, eigenvectors
