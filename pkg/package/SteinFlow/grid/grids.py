#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.grid.grids` --- Uniform grids and tabulated functions
========================================================================

Uniform 1D and 2D grids with midpoint quadrature and functions tabulated on
their nodes.  Scalar values have the grid shape, ``(n,)`` in 1D and
``(ny, nx)`` in 2D (flat index ``iy * nx + ix``).  Vector-valued functions
carry a leading component axis of length `d` ordered ``(x, y)``.
"""
from __future__ import annotations

import logging
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from SteinFlow.core.errors import InvalidSpecError, NumericError
from SteinFlow.core.sftypes import FloatArray, PointsLike

__all__ = [
    "Grid",
    "Grid1D",
    "Grid2D",
    "GridFunction",
    "GridDensity",
    "make_grid",
    "as_points",
]

logger = logging.getLogger(__name__)


def as_points(x: PointsLike, dimension: int) -> Tuple[FloatArray, bool]:
    """Convert `x` to an array of shape ``(N, dimension)``.
    :param x: single point or batch of points
    :param dimension: spatial dimension
    :return: points array and whether `x` was a single point"""
    arr = np.asarray(x, dtype=np.float64)
    if dimension == 1:
        if arr.ndim == 0:
            return arr.reshape(1, 1), True
        if arr.ndim == 1:
            return arr.reshape(-1, 1), False
        if arr.ndim == 2 and arr.shape[1] == 1:
            return arr, False
    else:
        if arr.ndim == 1 and arr.shape[0] == dimension:
            return arr.reshape(1, dimension), True
        if arr.ndim == 2 and arr.shape[1] == dimension:
            return arr, False
    raise ValueError(
        f"Expected points of dimension {dimension}, found shape {arr.shape}"
    )


class _UniformGrid:
    """Quadrature and domain helpers shared by 1D and 2D grids."""

    dimension: int
    spacing: float

    def __eq__(self, other):
        return type(other) is type(self) and self.spec() == other.spec()

    def __hash__(self):
        return hash(str(self.spec()))

    @property
    def center(self) -> FloatArray:
        return 0.5 * (self.lower_bounds + self.upper_bounds)

    @property
    def half_width(self) -> float:
        return float(np.max(0.5 * (self.upper_bounds - self.lower_bounds)))

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    def integrate(self, values: FloatArray) -> float:
        """Midpoint quadrature of nodal values."""
        return float(np.sum(values) * self.cell_volume)

    def inner(self, f: FloatArray, g: FloatArray) -> float:
        """Grid inner product ``sum(f * g) * spacing**d``."""
        return float(np.sum(f * g) * self.cell_volume)

    def contains(self, points: FloatArray) -> np.ndarray:
        """Per-point flag for being inside the closed domain."""
        points = np.asarray(points).reshape(-1, self.dimension)
        return np.all(
            (points >= self.lower_bounds) & (points <= self.upper_bounds),
            axis=1,
        )

    def clamp(self, points: FloatArray) -> Tuple[FloatArray, int]:
        """Project points onto the domain.
        :return: clamped points and number of clamped points"""
        points = np.asarray(points, dtype=np.float64).reshape(
            -1, self.dimension
        )
        clamped = np.clip(points, self.lower_bounds, self.upper_bounds)
        n_clamped = int(np.count_nonzero(np.any(clamped != points, axis=1)))
        return clamped, n_clamped


class Grid1D(_UniformGrid):
    """Uniform grid with nodes ``lower + i * spacing``, ``i = 0..n-1``.

    :param lower: first node
    :param upper: last node
    :param n: number of nodes (at least 3)
    """

    dimension = 1

    def __init__(self, lower: float, upper: float, n: int):
        try:
            lower, upper = float(lower), float(upper)
        except (TypeError, ValueError):
            raise InvalidSpecError(
                f"Grid bounds must be numbers, found {lower!r}, {upper!r}"
            )
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise InvalidSpecError(f"Grid size must be an integer, found {n!r}")
        n = int(n)
        if not np.isfinite([lower, upper]).all() or not upper > lower:
            raise InvalidSpecError(
                f"Grid requires finite upper > lower, found [{lower}, {upper}]"
            )
        if n < 3:
            raise InvalidSpecError(f"Grid requires n >= 3, found {n}")
        self.lower = lower
        self.upper = upper
        self.n = n
        self.spacing = (upper - lower) / (n - 1)
        self.nodes = lower + self.spacing * np.arange(n, dtype=np.float64)

    def __repr__(self):
        return f"{self.__class__.__name__}({self.lower}, {self.upper}, {self.n})"

    @property
    def shape(self) -> Tuple[int]:
        return (self.n,)

    @property
    def n_nodes(self) -> int:
        return self.n

    @property
    def axes(self) -> List[FloatArray]:
        return [self.nodes]

    @property
    def lower_bounds(self) -> FloatArray:
        return np.array([self.lower])

    @property
    def upper_bounds(self) -> FloatArray:
        return np.array([self.upper])

    @property
    def points(self) -> FloatArray:
        """Nodes as ``(n_nodes, 1)`` point array."""
        return self.nodes.reshape(-1, 1)

    def spec(self) -> Dict[str, Any]:
        return {"lower": self.lower, "upper": self.upper, "n": self.n}


class Grid2D(_UniformGrid):
    """Tensor product of two :class:`Grid1D` axes with equal spacing.

    :param x: x axis
    :param y: y axis
    """

    dimension = 2

    def __init__(self, x: Grid1D, y: Grid1D):
        if not np.isclose(x.spacing, y.spacing, rtol=1e-10, atol=0.0):
            raise InvalidSpecError(
                "2D grids require equal spacing on both axes, "
                f"found {x.spacing} and {y.spacing}"
            )
        self.x = x
        self.y = y
        self.spacing = x.spacing

    def __repr__(self):
        return f"{self.__class__.__name__}({self.x!r}, {self.y!r})"

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.y.n, self.x.n)

    @property
    def n_nodes(self) -> int:
        return self.x.n * self.y.n

    @property
    def axes(self) -> List[FloatArray]:
        return [self.x.nodes, self.y.nodes]

    @property
    def lower_bounds(self) -> FloatArray:
        return np.array([self.x.lower, self.y.lower])

    @property
    def upper_bounds(self) -> FloatArray:
        return np.array([self.x.upper, self.y.upper])

    @property
    def points(self) -> FloatArray:
        """Nodes as ``(n_nodes, 2)`` point array in row-major order."""
        xx, yy = np.meshgrid(self.x.nodes, self.y.nodes, indexing="xy")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def spec(self) -> List[Dict[str, Any]]:
        return [self.x.spec(), self.y.spec()]


Grid = Union[Grid1D, Grid2D]


def make_grid(spec: Union[Dict[str, Any], Sequence[Dict[str, Any]]]) -> Grid:
    """Build a grid from ``{"lower", "upper", "n"}`` or a list of two such
    axis specifications."""
    if isinstance(spec, _UniformGrid):
        return spec
    if isinstance(spec, dict):
        try:
            return Grid1D(spec["lower"], spec["upper"], spec["n"])
        except KeyError as e:
            raise InvalidSpecError(f"Grid specification misses {e.args[0]!r}")
    if isinstance(spec, (list, tuple)):
        axes = [make_grid(axis) for axis in spec]
        if len(axes) == 1:
            return axes[0]
        if len(axes) == 2 and all(isinstance(a, Grid1D) for a in axes):
            return Grid2D(*axes)
    raise InvalidSpecError(f"Cannot interpret grid specification {spec!r}")


class GridFunction:
    """Values tabulated on the nodes of a grid.

    :param grid: grid
    :param values: array of grid shape (scalar) or ``(d, *grid.shape)``
        (vector-valued)
    """

    def __init__(self, grid: Grid, values: FloatArray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape == grid.shape:
            self.is_vector = False
        elif values.shape == (grid.dimension, *grid.shape):
            self.is_vector = True
        elif grid.dimension == 2 and values.shape == (grid.n_nodes,):
            values = values.reshape(grid.shape)
            self.is_vector = False
        else:
            raise ValueError(
                f"Values of shape {values.shape} do not match grid shape "
                f"{grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise NumericError(f"Non-finite grid function value at {tuple(bad)}")
        self.grid = grid
        self.values = values

    def __repr__(self):
        kind = "vector" if self.is_vector else "scalar"
        return f"{self.__class__.__name__}({self.grid!r}, {kind})"

    def __getitem__(self, item):
        return self.values[item]

    def __len__(self):
        return self.values.size

    @property
    def flat(self) -> FloatArray:
        return self.values.ravel()

    def integrate(self) -> float:
        return self.grid.integrate(self.values)


class GridDensity(GridFunction):
    """Nonnegative density on a grid, normalised by midpoint quadrature.

    Values down to ``-negative_tol`` are accepted as rounding noise.
    """

    negative_tol = 1e-12

    def __init__(self, grid: Grid, values: FloatArray):
        super().__init__(grid, values)
        if self.is_vector:
            raise ValueError("Densities must be scalar grid functions")
        if np.min(self.values) < -self.negative_tol:
            idx = np.unravel_index(np.argmin(self.values), self.values.shape)
            raise NumericError(
                f"Negative density {np.min(self.values):.3e} at node {idx}"
            )

    @property
    def mass(self) -> float:
        return self.integrate()

    @classmethod
    def normalized(cls, grid: Grid, values: FloatArray) -> GridDensity:
        """Density with values rescaled to unit quadrature mass."""
        values = np.asarray(values, dtype=np.float64)
        mass = grid.integrate(values)
        if not np.isfinite(mass) or mass <= 0.0:
            raise NumericError(f"Cannot normalise density of mass {mass}")
        return cls(grid, values / mass)

    def mean(self) -> FloatArray:
        """First moment per axis."""
        if self.grid.dimension == 1:
            return np.array([self.grid.integrate(self.values * self.grid.nodes)])
        xx, yy = np.meshgrid(*self.grid.axes, indexing="xy")
        return np.array(
            [
                self.grid.integrate(self.values * xx),
                self.grid.integrate(self.values * yy),
            ]
        )
