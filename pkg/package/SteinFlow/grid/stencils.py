#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.grid.stencils` --- Finite differences and interpolation
==========================================================================

Finite-difference Laplacians (homogeneous Neumann ghost cells), gradients
(central interior, second-order one-sided boundary) and piecewise-linear
interpolation of tabulated functions.
"""
from __future__ import annotations

import logging
from typing import Tuple, Union

import numpy as np

from SteinFlow.core.errors import DomainError
from SteinFlow.core.sftypes import FloatArray, PointsLike
from SteinFlow.grid.grids import Grid, GridFunction, as_points

__all__ = [
    "fd_laplacian_1d",
    "fd_laplacian_2d",
    "fd_laplacian",
    "fd_gradient",
    "interpolate",
    "interpolate_stack",
    "linear_weights",
    "check_domain",
]

logger = logging.getLogger(__name__)


def fd_laplacian_1d(f: GridFunction) -> GridFunction:
    """3-point Laplacian; the ghost value beyond each end equals the
    boundary value."""
    if f.grid.dimension != 1 or f.is_vector:
        raise ValueError("fd_laplacian_1d expects a scalar 1D grid function")
    padded = np.pad(f.values, 1, mode="edge")
    values = (padded[:-2] + padded[2:] - 2.0 * padded[1:-1]) / f.grid.spacing**2
    return GridFunction(f.grid, values)


def fd_laplacian_2d(f: GridFunction) -> GridFunction:
    """5-point Laplacian with edge ghost cells."""
    if f.grid.dimension != 2 or f.is_vector:
        raise ValueError("fd_laplacian_2d expects a scalar 2D grid function")
    p = np.pad(f.values, 1, mode="edge")
    values = (
        p[1:-1, :-2] + p[1:-1, 2:] + p[:-2, 1:-1] + p[2:, 1:-1] - 4.0 * p[1:-1, 1:-1]
    ) / f.grid.spacing**2
    return GridFunction(f.grid, values)


def fd_laplacian(f: GridFunction) -> GridFunction:
    if f.grid.dimension == 1:
        return fd_laplacian_1d(f)
    return fd_laplacian_2d(f)


def fd_gradient(f: GridFunction) -> GridFunction:
    """Gradient as vector grid function with components ordered ``(x, y)``."""
    if f.is_vector:
        raise ValueError("fd_gradient expects a scalar grid function")
    h = f.grid.spacing
    if f.grid.dimension == 1:
        grad = np.gradient(f.values, h, edge_order=2)[np.newaxis]
    else:
        # np.gradient differentiates along axis 0 (y) first
        d_dy, d_dx = np.gradient(f.values, h, edge_order=2)
        grad = np.stack([d_dx, d_dy])
    return GridFunction(f.grid, grad)


def linear_weights(
    grid: Grid, points: FloatArray
) -> Tuple[FloatArray, FloatArray]:
    """Flat node indices and weights of (bi)linear interpolation.
    :param grid: grid
    :param points: in-domain points of shape ``(N, d)``
    :return: indices and weights of shape ``(N, 2**d)``"""
    idx_axes, frac_axes = [], []
    for axis, nodes in enumerate(grid.axes):
        n = nodes.shape[0]
        s = (points[:, axis] - nodes[0]) / grid.spacing
        i0 = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
        idx_axes.append(i0)
        frac_axes.append(np.clip(s - i0, 0.0, 1.0))
    if grid.dimension == 1:
        i0, t = idx_axes[0], frac_axes[0]
        return np.stack([i0, i0 + 1], axis=1), np.stack([1.0 - t, t], axis=1)
    (ix, iy), (tx, ty) = idx_axes, frac_axes
    nx = grid.shape[1]
    base = iy * nx + ix
    indices = np.stack([base, base + 1, base + nx, base + nx + 1], axis=1)
    weights = np.stack(
        [(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty], axis=1
    )
    return indices, weights


def check_domain(grid: Grid, points: FloatArray):
    inside = grid.contains(points)
    if not np.all(inside):
        bad = points[np.argmin(inside)]
        coordinate = float(bad[0]) if grid.dimension == 1 else tuple(bad)
        raise DomainError(
            f"Point {coordinate} outside grid domain "
            f"[{grid.lower_bounds}, {grid.upper_bounds}]",
            coordinate=coordinate,
        )


def interpolate_stack(
    grid: Grid, values: FloatArray, points: FloatArray
) -> FloatArray:
    """Interpolate several tabulated functions at once.
    :param grid: grid
    :param values: array of shape ``(m, *grid.shape)``
    :param points: in-domain points of shape ``(N, d)``
    :return: array of shape ``(m, N)``"""
    indices, weights = linear_weights(grid, points)
    flat = values.reshape(values.shape[0], -1)
    return np.einsum("mnc,nc->mn", flat[:, indices], weights)


def interpolate(
    f: GridFunction, x: PointsLike
) -> Union[float, FloatArray]:
    """Piecewise-linear (1D) or bilinear (2D) interpolation of a scalar grid
    function.
    :param f: grid function
    :param x: point or batch of points inside the domain
    :return: value or array of values"""
    if f.is_vector:
        raise ValueError("interpolate expects a scalar grid function")
    points, single = as_points(x, f.grid.dimension)
    check_domain(f.grid, points)
    result = interpolate_stack(f.grid, f.values[np.newaxis], points)[0]
    if single:
        return float(result[0])
    return result
