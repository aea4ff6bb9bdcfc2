#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.spectral.basis` --- Generator eigenbases and spectral kernel
===============================================================================

Eigenpairs :math:`(\lambda_i, \phi_i)`, :math:`i \geq 1`, of the generator
:math:`L` and the kernel

.. math:: K_L(x, y) = \sum_i \frac{\phi_i(x) \phi_i(y)}{\lambda_i}

whose integral operator against :math:`\pi` inverts :math:`L` on the
retained modes.  Bases are either tabulated on a grid (finite differences)
or analytic (normalised Hermite polynomials for the standard Gaussian).
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from SteinFlow.core.consts import MAX_HERMITE_MODES, ZERO_EIGENVALUE_TOL
from SteinFlow.core.errors import EmptyBasisError, InvalidSpecError
from SteinFlow.core.sftypes import FloatArray, PointsLike
from SteinFlow.grid.grids import Grid, GridFunction, as_points
from SteinFlow.grid.stencils import (
    check_domain,
    fd_gradient,
    fd_laplacian,
    interpolate_stack,
)
from SteinFlow.spectral.schrodinger import (
    build_schrodinger_matrix,
    eigendecompose,
    schrodinger_potential,
)
from SteinFlow.targets.mixture import TargetDistribution, normalized_pdf_on_grid

__all__ = [
    "SpectralBasis",
    "GridSpectralBasis",
    "HermiteBasis",
    "assemble_basis",
    "hermite_basis",
    "build_basis",
    "spectral_kernel_eval",
    "spectral_kernel_grad1",
    "spectral_kernel_grad2",
    "apply_generator",
    "apply_kernel_operator",
    "check_basis",
]

logger = logging.getLogger(__name__)


class SpectralBasis(ABC):
    """Retained eigenpairs of the generator, excluding the constant mode."""

    dimension: int
    eigenvalues: FloatArray

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]

    def __repr__(self):
        return f"{self.__class__.__name__}(k={self.k}, d={self.dimension})"

    def prepare_points(
        self, x: PointsLike, clamp: bool = False
    ) -> Tuple[FloatArray, bool, int]:
        """Points array of shape ``(N, d)``, single-point flag and number of
        clamped points."""
        points, single = as_points(x, self.dimension)
        return points, single, 0

    @abstractmethod
    def _values(self, points: FloatArray) -> FloatArray:
        """Eigenfunction values ``(k, N)``."""

    @abstractmethod
    def _gradients(self, points: FloatArray) -> FloatArray:
        """Eigenfunction gradients ``(k, d, N)``."""

    def values(self, x: PointsLike, clamp: bool = False) -> FloatArray:
        points, single, _ = self.prepare_points(x, clamp=clamp)
        result = self._values(points)
        return result[:, 0] if single else result

    def gradients(self, x: PointsLike, clamp: bool = False) -> FloatArray:
        points, single, _ = self.prepare_points(x, clamp=clamp)
        result = self._gradients(points)
        return result[..., 0] if single else result

    def evaluate(
        self, points: FloatArray, clamp: bool = False
    ) -> Tuple[FloatArray, FloatArray, int]:
        """Values ``(k, N)``, gradients ``(k, d, N)`` and clamp count for a
        batch of points."""
        points, _, n_clamped = self.prepare_points(points, clamp=clamp)
        return self._values(points), self._gradients(points), n_clamped


class GridSpectralBasis(SpectralBasis):
    """Eigenfunctions tabulated on a grid, interpolated (bi)linearly.

    :param grid: grid of the tabulated values
    :param eigenvalues: ascending positive eigenvalues ``(k,)``
    :param eigenfunctions: values ``(k, *grid.shape)``
    :param gradients: values ``(k, d, *grid.shape)``
    """

    def __init__(
        self,
        grid: Grid,
        eigenvalues: FloatArray,
        eigenfunctions: FloatArray,
        gradients: FloatArray,
    ):
        k = eigenvalues.shape[0]
        if eigenfunctions.shape != (k, *grid.shape):
            raise ValueError(
                f"Eigenfunctions of shape {eigenfunctions.shape} do not match "
                f"{k} modes on grid shape {grid.shape}"
            )
        if gradients.shape != (k, grid.dimension, *grid.shape):
            raise ValueError(f"Unexpected gradient shape {gradients.shape}")
        self.grid = grid
        self.dimension = grid.dimension
        self.eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        self.eigenfunction_values = np.asarray(eigenfunctions, dtype=np.float64)
        self.gradient_values = np.asarray(gradients, dtype=np.float64)
        self._flat_gradients = self.gradient_values.reshape(
            k * self.dimension, *grid.shape
        )

    @property
    def eigenfunctions(self):
        return [GridFunction(self.grid, v) for v in self.eigenfunction_values]

    @property
    def eigenfunction_gradients(self):
        return [GridFunction(self.grid, g) for g in self.gradient_values]

    def prepare_points(self, x, clamp=False):
        points, single = as_points(x, self.dimension)
        if clamp:
            points, n_clamped = self.grid.clamp(points)
        else:
            check_domain(self.grid, points)
            n_clamped = 0
        return points, single, n_clamped

    def _values(self, points):
        return interpolate_stack(self.grid, self.eigenfunction_values, points)

    def _gradients(self, points):
        flat = interpolate_stack(self.grid, self._flat_gradients, points)
        return flat.reshape(self.k, self.dimension, -1)


class HermiteBasis(SpectralBasis):
    """Normalised probabilists' Hermite polynomials
    :math:`\phi_n = He_n / \sqrt{n!}`, :math:`n = 1..k`, eigenfunctions of
    the generator of the standard Gaussian with :math:`\lambda_n = n`."""

    dimension = 1

    def __init__(self, k: int):
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise InvalidSpecError(f"Number of Hermite modes must be >= 1, found {k}")
        if k > MAX_HERMITE_MODES:
            raise InvalidSpecError(
                f"At most {MAX_HERMITE_MODES} Hermite modes are supported, found {k}"
            )
        self.eigenvalues = np.arange(1, int(k) + 1, dtype=np.float64)

    def _polynomials(self, points) -> FloatArray:
        """Rows ``phi_0..phi_k`` via the normalised three-term recurrence."""
        x = points[:, 0]
        phi = np.empty((self.k + 1, x.shape[0]))
        phi[0] = 1.0
        phi[1] = x
        for n in range(1, self.k):
            phi[n + 1] = (x * phi[n] - np.sqrt(n) * phi[n - 1]) / np.sqrt(n + 1)
        return phi

    def _values(self, points):
        return self._polynomials(points)[1:]

    def _gradients(self, points):
        phi = self._polynomials(points)
        return (np.sqrt(self.eigenvalues)[:, np.newaxis] * phi[:-1])[
            :, np.newaxis, :
        ]


def hermite_basis(k: int) -> HermiteBasis:
    return HermiteBasis(k)


def assemble_basis(
    target: TargetDistribution,
    grid: Grid,
    eigenpairs: Tuple[FloatArray, FloatArray],
) -> GridSpectralBasis:
    """Turn Schrödinger eigenpairs into generator eigenfunctions.

    Drops the smallest eigenpair (ground mode) and eigenvalues
    ``<= ZERO_EIGENVALUE_TOL``, back-transforms ``phi = exp(V/2) phi_S``,
    normalises to unit ``L²(π̂)`` norm, fixes signs so that each ``phi`` is
    positive where ``|phi|`` is largest, and differentiates on the grid.
    """
    eigenvalues, eigenvectors = eigenpairs
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
    keep = np.zeros(eigenvalues.shape[0], dtype=bool)
    keep[1:] = eigenvalues[1:] > ZERO_EIGENVALUE_TOL
    n_negative = int(np.count_nonzero(eigenvalues[1:] <= ZERO_EIGENVALUE_TOL))
    if n_negative:
        logger.finfo(f"Discarding {n_negative} non-positive eigenvalues")
    if not np.any(keep):
        raise EmptyBasisError("No eigenmode retained after filtering")
    eigenvalues = eigenvalues[keep]
    vectors = eigenvectors[:, keep].T.reshape(-1, *grid.shape)
    potential = np.asarray(target.potential(grid.points)).reshape(grid.shape)
    phi = vectors * np.exp(0.5 * (potential - np.max(potential)))
    pi_hat = normalized_pdf_on_grid(target, grid).values
    norms = np.sqrt(
        np.sum(phi**2 * pi_hat, axis=tuple(range(1, phi.ndim)))
        * grid.cell_volume
    )
    phi /= norms.reshape(-1, *([1] * grid.dimension))
    flat = phi.reshape(phi.shape[0], -1)
    peak = flat[np.arange(flat.shape[0]), np.argmax(np.abs(flat), axis=1)]
    phi *= np.where(peak < 0, -1.0, 1.0).reshape(-1, *([1] * grid.dimension))
    gradients = np.stack(
        [fd_gradient(GridFunction(grid, mode)).values for mode in phi]
    )
    return GridSpectralBasis(grid, eigenvalues, phi, gradients)


def build_basis(
    target: TargetDistribution, grid: Grid, k: Optional[int] = None
) -> GridSpectralBasis:
    """Finite-difference eigenbasis with up to `k` retained modes (all modes
    if `k` is None)."""
    n_pairs = grid.n_nodes if k is None else min(int(k) + 1, grid.n_nodes)
    vs = schrodinger_potential(target, grid)
    matrix = build_schrodinger_matrix(vs)
    eigenpairs = eigendecompose(matrix, n_pairs)
    basis = assemble_basis(target, grid, eigenpairs)
    logger.finfo(
        f"Spectral basis: {basis.k} modes, "
        f"λ₁ = {basis.eigenvalues[0]:.5f}, λ_k = {basis.eigenvalues[-1]:.3f}"
    )
    return basis


def _kernel_factors(basis: SpectralBasis, x, y, clamp):
    xs, x_single, _ = basis.prepare_points(x, clamp=clamp)
    ys, y_single, _ = basis.prepare_points(y, clamp=clamp)
    return xs, ys, x_single and y_single


def spectral_kernel_eval(
    basis: SpectralBasis, x: PointsLike, y: PointsLike, clamp: bool = False
) -> Union[float, FloatArray]:
    """``K_L(x, y)``; pairwise matrix ``(N, M)`` for batches of points."""
    xs, ys, single = _kernel_factors(basis, x, y, clamp)
    scale = 1.0 / np.sqrt(basis.eigenvalues)[:, np.newaxis]
    a = basis._values(xs) * scale
    b = basis._values(ys) * scale
    if single:
        return float(np.sum(a[:, 0] * b[:, 0]))
    return a.T @ b


def spectral_kernel_grad1(
    basis: SpectralBasis, x: PointsLike, y: PointsLike, clamp: bool = False
) -> FloatArray:
    """``∇₁K_L(x, y)``; shape ``(d,)`` for single points, ``(N, M, d)`` for
    batches."""
    xs, ys, single = _kernel_factors(basis, x, y, clamp)
    grads = basis._gradients(xs)
    weighted = basis._values(ys) / basis.eigenvalues[:, np.newaxis]
    result = np.einsum("kan,km->nma", grads, weighted)
    return result[0, 0] if single else result


def spectral_kernel_grad2(
    basis: SpectralBasis, x: PointsLike, y: PointsLike, clamp: bool = False
) -> FloatArray:
    """``∇₂K_L(x, y) = ∇₁K_L(y, x)``."""
    result = spectral_kernel_grad1(basis, y, x, clamp=clamp)
    return result if result.ndim == 1 else np.swapaxes(result, 0, 1)


def apply_generator(target: TargetDistribution, f: GridFunction) -> GridFunction:
    """``L f = -Δf + ∇V·∇f`` with finite-difference stencils."""
    grid = f.grid
    grad_v = np.asarray(target.grad_potential(grid.points)).reshape(
        -1, grid.dimension
    )
    grad_v = grad_v.T.reshape(grid.dimension, *grid.shape)
    grad_f = fd_gradient(f).values
    values = -fd_laplacian(f).values + np.sum(grad_v * grad_f, axis=0)
    return GridFunction(grid, values)


def apply_kernel_operator(
    basis: GridSpectralBasis, f: GridFunction, pi_hat: GridFunction
) -> GridFunction:
    """Quadrature of ``x -> sum_j K_L(x, x_j) f(x_j) π̂(x_j) ε^d`` at all
    nodes."""
    phi = basis.eigenfunction_values.reshape(basis.k, -1)
    weights = (f.values * pi_hat.values).ravel() * basis.grid.cell_volume
    projections = phi @ weights
    values = (projections / basis.eigenvalues) @ phi
    return GridFunction(basis.grid, values.reshape(basis.grid.shape))


def check_basis(
    basis: GridSpectralBasis,
    target: TargetDistribution,
    n_modes: int = 20,
) -> pd.DataFrame:
    """Per-mode quality table of a tabulated basis.

    Columns: ``eigenvalue``, ``rayleigh_residual`` (quadrature of
    ``(Lφ - λφ)²`` over interior nodes against π̂, relative to ``λ²``),
    ``mean`` (``∫φ dπ̂``) and ``gram_deviation`` (largest
    ``|<φ_i, φ_j> - δ_ij|`` over the first `n_modes` modes).
    """
    grid = basis.grid
    n_modes = min(n_modes, basis.k)
    pi_hat = normalized_pdf_on_grid(target, grid)
    interior = np.zeros(grid.shape, dtype=bool)
    interior[(slice(1, -1),) * grid.dimension] = True
    phi = basis.eigenfunction_values[:n_modes]
    gram = np.einsum(
        "ik,jk->ij",
        (phi * pi_hat.values).reshape(n_modes, -1),
        phi.reshape(n_modes, -1),
    ) * grid.cell_volume
    gram_dev = np.abs(gram - np.eye(n_modes))
    rows = []
    for i in range(n_modes):
        lam = basis.eigenvalues[i]
        residual = apply_generator(target, GridFunction(grid, phi[i])).values
        residual -= lam * phi[i]
        rows.append(
            {
                "mode": i + 1,
                "eigenvalue": lam,
                "rayleigh_residual": grid.integrate(
                    np.where(interior, residual**2 * pi_hat.values, 0.0)
                )
                / lam**2,
                "mean": grid.integrate(phi[i] * pi_hat.values),
                "gram_deviation": float(np.max(gram_dev[i])),
            }
        )
    return pd.DataFrame(rows).set_index("mode")
