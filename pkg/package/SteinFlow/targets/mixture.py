#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.targets.mixture` --- Target distributions
============================================================

Targets :math:`\pi \propto e^{-V}` given by their potential with analytic
gradient and Laplacian.  Gaussian mixtures with diagonal covariances are
composed in log-sum-exp form.
"""
from __future__ import annotations

import logging
from typing import Any, Callable, Dict, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp, softmax

from SteinFlow.core.errors import DomainError, InvalidSpecError, NumericError
from SteinFlow.core.sftypes import FloatArray, PointsLike
from SteinFlow.grid.grids import Grid, Grid1D, GridDensity, as_points

__all__ = [
    "GaussianMixtureSpec",
    "TargetDistribution",
    "make_gaussian_mixture",
    "standard_gaussian",
    "make_target",
    "normalized_pdf_on_grid",
    "quantile_function",
    "grid_cdf",
]

logger = logging.getLogger(__name__)

BOUNDARY_MASS_WARNING = 1e-10


class GaussianMixtureSpec:
    """Weights, means and diagonal variances of a Gaussian mixture.

    :param weights: probability vector of length K
    :param means: K scalars (1D) or K d-vectors
    :param variances: K positive scalars (isotropic), K d-vectors (diagonal)
        or K diagonal d×d matrices
    """

    def __init__(
        self,
        weights: Sequence[float],
        means: Sequence[Union[float, Sequence[float]]],
        variances: Sequence[Union[float, Sequence[float], Sequence[Sequence[float]]]],
    ):
        try:
            weights = np.asarray(weights, dtype=np.float64).reshape(-1)
            means = np.asarray(means, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise InvalidSpecError(f"Invalid mixture specification: {e}")
        n_components = weights.shape[0]
        if n_components == 0:
            raise InvalidSpecError("Mixture needs at least one component")
        if means.ndim == 1:
            means = means.reshape(-1, 1)
        if means.ndim != 2 or means.shape[0] != n_components:
            raise InvalidSpecError(
                f"Expected {n_components} means, found shape {means.shape}"
            )
        dimension = means.shape[1]
        if dimension not in (1, 2):
            raise InvalidSpecError(f"Unsupported dimension {dimension}")
        self.variances = self._diagonal_variances(
            variances, n_components, dimension
        )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidSpecError(f"Invalid mixture weights {weights}")
        if np.all(weights == 0):
            raise InvalidSpecError("Mixture weights are all zero")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidSpecError(
                f"Mixture weights sum to {weights.sum()!r}, expected 1"
            )
        if not np.all(np.isfinite(means)):
            raise InvalidSpecError("Mixture means must be finite")
        self.weights = weights
        self.means = means
        self.dimension = dimension

    @staticmethod
    def _diagonal_variances(variances, n_components, dimension) -> FloatArray:
        try:
            var = np.asarray(variances, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise InvalidSpecError(f"Invalid mixture variances: {e}")
        if var.ndim == 1 and var.shape[0] == n_components:
            var = np.repeat(var[:, np.newaxis], dimension, axis=1)
        elif var.shape == (n_components, dimension, dimension):
            off_diagonal = var[:, ~np.eye(dimension, dtype=bool)]
            if np.any(off_diagonal != 0):
                raise InvalidSpecError(
                    "Only diagonal covariance matrices are supported"
                )
            var = np.diagonal(var, axis1=1, axis2=2).copy()
        elif var.shape != (n_components, dimension):
            raise InvalidSpecError(
                f"Expected {n_components} variances, found shape {var.shape}"
            )
        if not np.all(np.isfinite(var)) or np.any(var <= 0):
            raise InvalidSpecError(
                f"Mixture variances must be positive, found {var.tolist()}"
            )
        return var

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> GaussianMixtureSpec:
        if spec.get("type", "gaussian_mixture") != "gaussian_mixture":
            raise InvalidSpecError(f"Unknown target type {spec.get('type')!r}")
        try:
            return cls(spec["weights"], spec["means"], spec["variances"])
        except KeyError as e:
            raise InvalidSpecError(f"Mixture specification misses {e.args[0]!r}")

    def to_dict(self) -> Dict[str, Any]:
        if self.dimension == 1:
            means = self.means[:, 0].tolist()
            variances = self.variances[:, 0].tolist()
        else:
            means = self.means.tolist()
            variances = self.variances.tolist()
        return {
            "type": "gaussian_mixture",
            "weights": self.weights.tolist(),
            "means": means,
            "variances": variances,
        }

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def is_standard_gaussian(self) -> bool:
        return (
            self.n_components == 1
            and np.all(self.means == 0)
            and np.all(self.variances == 1)
        )


class TargetDistribution:
    """Distribution with density proportional to ``exp(-V)``.

    Potential, gradient and Laplacian take a point or a batch of points of
    shape ``(N, d)`` (``(N,)`` in 1D) and return per-point values; for a
    single point scalars (``V``, ``ΔV``) or a length-d vector (``∇V``).

    :param dimension: 1 or 2
    :param potential: batched ``V``, ``(N, d) -> (N,)``
    :param grad_potential: batched ``∇V``, ``(N, d) -> (N, d)``
    :param laplacian_potential: batched ``ΔV``, ``(N, d) -> (N,)``
    :param poincare_constant: Poincaré constant if known
    :param lsi_constant: log-Sobolev constant if known
    :param spec: specification the target was built from
    """

    def __init__(
        self,
        dimension: int,
        potential: Callable[[FloatArray], FloatArray],
        grad_potential: Callable[[FloatArray], FloatArray],
        laplacian_potential: Callable[[FloatArray], FloatArray],
        poincare_constant: Optional[float] = None,
        lsi_constant: Optional[float] = None,
        spec: Optional[GaussianMixtureSpec] = None,
        offset: float = 0.0,
    ):
        if dimension not in (1, 2):
            raise InvalidSpecError(f"Unsupported dimension {dimension}")
        for name, constant in (
            ("Poincaré", poincare_constant),
            ("log-Sobolev", lsi_constant),
        ):
            if constant is not None and not constant > 0:
                raise InvalidSpecError(f"{name} constant must be positive")
        self.dimension = dimension
        self._potential = potential
        self._grad_potential = grad_potential
        self._laplacian_potential = laplacian_potential
        self.poincare_constant = poincare_constant
        self.lsi_constant = lsi_constant
        self.spec = spec
        self.offset = float(offset)

    def __repr__(self):
        name = "mixture" if self.spec is not None else "custom"
        return f"{self.__class__.__name__}({name}, d={self.dimension})"

    def _apply(self, f, x, vector=False):
        points, single = as_points(x, self.dimension)
        result = f(points)
        if single:
            return result[0] if vector else float(result[0])
        return result

    def potential(self, x: PointsLike) -> Union[float, FloatArray]:
        return self._apply(lambda p: self._potential(p) + self.offset, x)

    def grad_potential(self, x: PointsLike) -> FloatArray:
        return self._apply(self._grad_potential, x, vector=True)

    def laplacian_potential(self, x: PointsLike) -> Union[float, FloatArray]:
        return self._apply(self._laplacian_potential, x)

    def density(self, x: PointsLike) -> Union[float, FloatArray]:
        """Unnormalised density ``exp(-V)``."""
        return np.exp(-np.asarray(self.potential(x)))

    def shifted(self, constant: float) -> TargetDistribution:
        """Same distribution with ``V + constant`` as potential."""
        return TargetDistribution(
            self.dimension,
            self._potential,
            self._grad_potential,
            self._laplacian_potential,
            poincare_constant=self.poincare_constant,
            lsi_constant=self.lsi_constant,
            spec=self.spec,
            offset=self.offset + constant,
        )

    def to_dict(self) -> Dict[str, Any]:
        if self.spec is None:
            raise ValueError("Target has no serialisable specification")
        spec = self.spec.to_dict()
        if self.offset:
            spec["offset"] = self.offset
        return spec

    @property
    def is_standard_gaussian(self) -> bool:
        return self.spec is not None and self.spec.is_standard_gaussian


def make_gaussian_mixture(spec: GaussianMixtureSpec) -> TargetDistribution:
    """Target ``V = -ln sum_k w_k N(x; m_k, diag(v_k))`` with analytic
    derivatives.

    With responsibilities :math:`r_k` and component scores
    :math:`g_k = -(x - m_k) / v_k`:
    :math:`\nabla V = -\sum_k r_k g_k` and
    :math:`\Delta V = \sum_k r_k (\sum_a 1/v_{ka} - |g_k|^2) + |\sum_k r_k g_k|^2`.
    """
    if isinstance(spec, dict):
        spec = GaussianMixtureSpec.from_dict(spec)
    with np.errstate(divide="ignore"):
        log_weights = np.log(spec.weights)
    means = spec.means
    variances = spec.variances
    log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * variances), axis=1)
    inv_var_sum = np.sum(1.0 / variances, axis=1)

    def component_terms(points):
        diff = points[:, np.newaxis, :] - means[np.newaxis]
        log_comp = (
            log_weights
            + log_norm
            - 0.5 * np.sum(diff**2 / variances[np.newaxis], axis=2)
        )
        return diff, log_comp

    def potential(points):
        _, log_comp = component_terms(points)
        return -logsumexp(log_comp, axis=1)

    def grad_potential(points):
        diff, log_comp = component_terms(points)
        resp = softmax(log_comp, axis=1)
        return np.einsum("nk,nka->na", resp, diff / variances[np.newaxis])

    def laplacian_potential(points):
        diff, log_comp = component_terms(points)
        resp = softmax(log_comp, axis=1)
        scores = -diff / variances[np.newaxis]
        mean_score = np.einsum("nk,nka->na", resp, scores)
        return np.sum(
            resp * (inv_var_sum[np.newaxis] - np.sum(scores**2, axis=2)),
            axis=1,
        ) + np.sum(mean_score**2, axis=1)

    constants = {}
    if spec.is_standard_gaussian:
        constants = {"poincare_constant": 1.0, "lsi_constant": 1.0}
    return TargetDistribution(
        spec.dimension,
        potential,
        grad_potential,
        laplacian_potential,
        spec=spec,
        **constants,
    )


def standard_gaussian(dimension: int = 1) -> TargetDistribution:
    """Standard normal target, ``C_P = C_LSI = 1``."""
    if dimension == 1:
        spec = GaussianMixtureSpec([1.0], [0.0], [1.0])
    else:
        spec = GaussianMixtureSpec([1.0], [[0.0] * dimension], [1.0])
    return make_gaussian_mixture(spec)


def make_target(spec: Union[Dict[str, Any], GaussianMixtureSpec]) -> TargetDistribution:
    """Target from its configuration entry."""
    if isinstance(spec, TargetDistribution):
        return spec
    if isinstance(spec, dict):
        offset = spec.get("offset", 0.0)
        spec = GaussianMixtureSpec.from_dict(
            {k: v for k, v in spec.items() if k != "offset"}
        )
        target = make_gaussian_mixture(spec)
        return target.shifted(offset) if offset else target
    return make_gaussian_mixture(spec)


def normalized_pdf_on_grid(target: TargetDistribution, grid: Grid) -> GridDensity:
    """Grid density proportional to ``exp(-V)`` with unit quadrature mass."""
    if target.dimension != grid.dimension:
        raise ValueError(
            f"Target dimension {target.dimension} does not match grid "
            f"dimension {grid.dimension}"
        )
    log_density = -np.asarray(target.potential(grid.points)).reshape(grid.shape)
    if not np.all(np.isfinite(log_density)):
        raise NumericError("Non-finite potential values on grid")
    values = np.exp(log_density - np.max(log_density))
    mass = grid.integrate(values)
    if not mass > 0:
        raise NumericError("Target density vanishes on the whole grid")
    values = values / mass
    boundary = _boundary_values(values)
    if np.max(boundary) > BOUNDARY_MASS_WARNING * np.max(values):
        logger.warning(
            f"Target density at the grid boundary is "
            f"{np.max(boundary) / np.max(values):.2e} of its maximum, "
            "consider a wider grid."
        )
    return GridDensity(grid, values)


def _boundary_values(values: FloatArray) -> FloatArray:
    if values.ndim == 1:
        return values[[0, -1]]
    return np.concatenate(
        [values[0], values[-1], values[:, 0], values[:, -1]]
    )


def grid_cdf(density: GridDensity) -> tuple:
    """Cumulative quadrature at cell edges of a 1D density.
    :return: cell edges and cumulative mass at the edges"""
    grid = density.grid
    if grid.dimension != 1:
        raise ValueError("Cumulative distributions need a 1D grid")
    edges = np.concatenate(
        [grid.nodes - 0.5 * grid.spacing, [grid.nodes[-1] + 0.5 * grid.spacing]]
    )
    cdf = np.concatenate(
        [[0.0], np.cumsum(np.clip(density.values, 0.0, None)) * grid.spacing]
    )
    return edges, cdf / cdf[-1]


def quantile_function(
    target: Union[TargetDistribution, GridDensity],
    grid: Optional[Grid1D],
    p: Union[float, Sequence[float], FloatArray],
) -> Union[float, FloatArray]:
    """Inverse of the piecewise-linear grid CDF.
    :param target: target distribution (or a 1D grid density)
    :param grid: 1D grid (ignored for grid densities)
    :param p: probability or array of probabilities in (0, 1)
    :return: quantile(s)"""
    if isinstance(target, GridDensity):
        density = target
    else:
        if target.dimension != 1:
            raise ValueError("Quantiles are only defined in 1D")
        density = normalized_pdf_on_grid(target, grid)
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any(~(p_arr > 0.0) | ~(p_arr < 1.0)):
        bad = p_arr[~((p_arr > 0.0) & (p_arr < 1.0))].ravel()[0]
        raise DomainError(f"Probability {bad} outside (0, 1)", coordinate=float(bad))
    edges, cdf = grid_cdf(density)
    # drop flat steps so that the inverse is single-valued
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    result = np.interp(p_arr, cdf[keep], edges[keep])
    if p_arr.ndim == 0:
        return float(result)
    return result
