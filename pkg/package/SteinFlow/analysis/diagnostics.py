#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.analysis.diagnostics` --- Divergences and decay fits
=======================================================================

Grid-quadrature KL and chi-squared divergences, Gaussian kernel density
estimates of particle ensembles, 1D Wasserstein-1 distances through target
quantiles, mode-mass fractions and log-linear decay-rate fits.
"""
from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import gaussian_kde, linregress, norm

from SteinFlow.analysis.results import Results
from SteinFlow.core.consts import DENSITY_FLOOR
from SteinFlow.core.errors import InsufficientDataError, NumericError
from SteinFlow.core.sftypes import FloatArray, PointsLike
from SteinFlow.grid.grids import Grid, GridDensity
from SteinFlow.targets.mixture import (
    GaussianMixtureSpec,
    TargetDistribution,
    quantile_function,
)

__all__ = [
    "DivergenceReport",
    "DecayFit",
    "DEFAULT_DECAY_WINDOW",
    "silverman_bandwidth",
    "kde_on_grid",
    "kl_grid",
    "chi2_grid",
    "w1_1d",
    "fit_decay_rate",
    "mode_masses",
    "mixture_mode_edges",
    "divergence_report",
]

logger = logging.getLogger(__name__)

# values outside this range are KDE noise floor or burn-in
DEFAULT_DECAY_WINDOW = (1e-4, 1e-1)
MIN_FIT_POINTS = 5


class DivergenceReport(Results):
    """Divergences of one particle snapshot from the target.

    Keys: ``kl``, ``chi2``, ``w1`` (NaN where undefined) and
    ``kde_bandwidth``."""


class DecayFit:
    """Least-squares fit ``ln value ≈ intercept + rate * t``.

    :param rate: slope
    :param intercept: intercept
    :param window: ``(t_lo, t_hi)`` of the fitted points
    :param r_squared: coefficient of determination
    :param n_points: number of fitted points
    """

    def __init__(
        self,
        rate: float,
        intercept: float,
        window: Tuple[float, float],
        r_squared: float,
        n_points: int,
    ):
        self.rate = rate
        self.intercept = intercept
        self.window = window
        self.r_squared = r_squared
        self.n_points = n_points

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(rate={self.rate:.5g}, "
            f"window=[{self.window[0]:.4g}, {self.window[1]:.4g}], "
            f"r²={self.r_squared:.4f}, n={self.n_points})"
        )


def _as_values(density: Union[GridDensity, FloatArray]) -> FloatArray:
    if isinstance(density, GridDensity):
        return density.values
    return np.asarray(density, dtype=np.float64)


def _cell_volume(*densities) -> float:
    for density in densities:
        if isinstance(density, GridDensity):
            return density.grid.cell_volume
    raise TypeError("At least one argument must be a GridDensity")


def silverman_bandwidth(particles: PointsLike) -> float:
    """``1.06 σ̂ N^(-1/5)``; 0 for a zero-variance ensemble."""
    x = np.asarray(particles, dtype=np.float64).reshape(-1)
    return 1.06 * float(np.std(x, ddof=1)) * x.shape[0] ** (-0.2)


def kde_on_grid(
    particles: PointsLike, grid: Grid, bandwidth: Optional[float] = None
) -> GridDensity:
    """Gaussian kernel density estimate at the grid nodes, renormalised to
    unit quadrature mass.
    :param particles: ``(N,)`` or ``(N, 1)`` particle positions, ``N >= 2``
    :param grid: 1D grid
    :param bandwidth: kernel standard deviation, Silverman's rule if None
    """
    if grid.dimension != 1:
        raise ValueError("Kernel density estimates are computed in 1D only")
    x = np.asarray(particles, dtype=np.float64).reshape(-1)
    if x.shape[0] < 2:
        raise InsufficientDataError(
            f"Kernel density estimate needs at least 2 particles, found {x.shape[0]}"
        )
    sigma = float(np.std(x, ddof=1))
    if bandwidth is None:
        bandwidth = silverman_bandwidth(x)
    if sigma > 0 and bandwidth > 0:
        kde = gaussian_kde(x, bw_method=bandwidth / sigma)
        values = kde(grid.nodes)
    else:
        # all particles coincide
        bandwidth = grid.spacing
        values = norm.pdf(grid.nodes, loc=x[0], scale=bandwidth)
    density = GridDensity.normalized(grid, values)
    density.bandwidth = bandwidth
    return density


def kl_grid(
    mu: Union[GridDensity, FloatArray],
    pi: Union[GridDensity, FloatArray],
    cell_volume: Optional[float] = None,
) -> float:
    """``sum mu ln(mu / pi) ε^d`` with ``0 ln 0 = 0``, clipped at 0."""
    if cell_volume is None:
        cell_volume = _cell_volume(mu, pi)
    m = _as_values(mu)
    p = np.maximum(_as_values(pi), DENSITY_FLOOR)
    positive = m > 0
    terms = np.zeros_like(m)
    terms[positive] = m[positive] * np.log(m[positive] / p[positive])
    return max(float(np.sum(terms) * cell_volume), 0.0)


def chi2_grid(
    mu: Union[GridDensity, FloatArray],
    pi: Union[GridDensity, FloatArray],
    cell_volume: Optional[float] = None,
) -> float:
    """``sum (mu / pi - 1)² pi ε^d``."""
    if cell_volume is None:
        cell_volume = _cell_volume(mu, pi)
    m = _as_values(mu)
    p = np.maximum(_as_values(pi), DENSITY_FLOOR)
    return max(float(np.sum((m / p - 1.0) ** 2 * p) * cell_volume), 0.0)


def w1_1d(
    particles: PointsLike,
    target: Union[TargetDistribution, GridDensity],
    grid: Optional[Grid] = None,
) -> float:
    """``(1/N) sum |x_(i) - q((i - 1/2) / N)|`` for sorted particles."""
    x = np.sort(np.asarray(particles, dtype=np.float64).reshape(-1))
    n = x.shape[0]
    if n == 0:
        raise InsufficientDataError("Wasserstein distance needs particles")
    probabilities = (np.arange(1, n + 1) - 0.5) / n
    quantiles = quantile_function(target, grid, probabilities)
    return float(np.mean(np.abs(x - quantiles)))


def _series_arrays(series) -> Tuple[FloatArray, FloatArray]:
    if isinstance(series, pd.DataFrame):
        return (
            series.iloc[:, 0].to_numpy(dtype=np.float64),
            series.iloc[:, 1].to_numpy(dtype=np.float64),
        )
    if isinstance(series, pd.Series):
        return (
            series.index.to_numpy(dtype=np.float64),
            series.to_numpy(dtype=np.float64),
        )
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"Expected (t, value) pairs, found shape {arr.shape}")
    return arr[:, 0], arr[:, 1]


def fit_decay_rate(
    series,
    window: Optional[Tuple[float, float]] = DEFAULT_DECAY_WINDOW,
    t_range: Optional[Tuple[float, float]] = None,
) -> DecayFit:
    """Fit an exponential rate to a positive time series.
    :param series: ``(t, value)`` pairs, a two-column DataFrame or a Series
        indexed by time
    :param window: value range ``(lo, hi)`` of the fitted points, all
        positive values if None
    :param t_range: optional time range of the fitted points
    :return: fitted decay"""
    t, v = _series_arrays(series)
    usable = np.isfinite(t) & np.isfinite(v) & (v > 0)
    if window is not None:
        usable &= (v >= window[0]) & (v <= window[1])
    if t_range is not None:
        usable &= (t >= t_range[0]) & (t <= t_range[1])
    if np.count_nonzero(usable) < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"Decay fit needs at least {MIN_FIT_POINTS} points in window "
            f"{window}, found {np.count_nonzero(usable)}"
        )
    t, v = t[usable], v[usable]
    fit = linregress(t, np.log(v))
    return DecayFit(
        rate=float(fit.slope),
        intercept=float(fit.intercept),
        window=(float(t.min()), float(t.max())),
        r_squared=float(min(max(fit.rvalue**2, 0.0), 1.0)),
        n_points=int(t.shape[0]),
    )


def mixture_mode_edges(spec: GaussianMixtureSpec) -> FloatArray:
    """Midpoints between consecutive sorted component means (1D)."""
    means = np.sort(spec.means[:, 0])
    return 0.5 * (means[1:] + means[:-1])


def mode_masses(
    points: PointsLike,
    edges: Optional[Sequence[float]] = None,
    centers: Optional[Sequence[Sequence[float]]] = None,
) -> FloatArray:
    """Fraction of particles per mode.

    1D: intervals delimited by `edges`; any dimension: nearest of
    `centers`."""
    points = np.asarray(points, dtype=np.float64)
    if centers is not None:
        centers = np.asarray(centers, dtype=np.float64)
        points = points.reshape(points.shape[0], -1)
        dist = np.linalg.norm(
            points[:, np.newaxis, :] - centers[np.newaxis], axis=2
        )
        labels = np.argmin(dist, axis=1)
        counts = np.bincount(labels, minlength=centers.shape[0])
    elif edges is not None:
        labels = np.searchsorted(np.asarray(edges), points.reshape(-1), side="right")
        counts = np.bincount(labels, minlength=len(edges) + 1)
    else:
        raise ValueError("Either edges or centers are required")
    return counts / counts.sum()


def divergence_report(
    particles: PointsLike,
    target: TargetDistribution,
    pi_hat: GridDensity,
) -> DivergenceReport:
    """KL, chi-squared (via KDE) and W1 of a 1D particle snapshot; NaN
    entries for 2D snapshots or single particles."""
    grid = pi_hat.grid
    report = DivergenceReport(
        kl=np.nan, chi2=np.nan, w1=np.nan, kde_bandwidth=np.nan
    )
    if grid.dimension != 1:
        return report
    x = np.asarray(particles, dtype=np.float64).reshape(-1)
    report.w1 = w1_1d(x, pi_hat)
    if x.shape[0] >= 2:
        try:
            kde = kde_on_grid(x, grid)
        except NumericError as e:
            logger.warning(f"Skipping density estimate: {e}")
        else:
            report.kl = kl_grid(kde, pi_hat)
            report.chi2 = chi2_grid(kde, pi_hat)
            report.kde_bandwidth = kde.bandwidth
    return report
