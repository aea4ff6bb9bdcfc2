#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.kernels.kernels` --- Kernels for particle dynamics
=====================================================================

RBF kernel :math:`K(x, y) = \exp(-|x - y|^2 / bw)` with median bandwidth
and the spectral kernel :math:`K_L` behind one handle exposing value,
:math:`\nabla_1 K` and :math:`\nabla_2 K`.
"""
from __future__ import annotations

import logging
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import pdist

from SteinFlow.core.errors import InsufficientDataError, InvalidSpecError
from SteinFlow.core.sftypes import FloatArray, PointLike, PointsLike
from SteinFlow.spectral.basis import (
    SpectralBasis,
    spectral_kernel_eval,
    spectral_kernel_grad1,
    spectral_kernel_grad2,
)

__all__ = [
    "KernelHandle",
    "rbf_median_bandwidth",
    "rbf_eval",
    "rbf_grad1",
    "rbf_grad2",
    "kernel_eval",
    "kernel_grad1",
    "kernel_grad2",
]

logger = logging.getLogger(__name__)

KERNEL_KINDS = ("rbf", "spectral")


class KernelHandle:
    """Kernel selection for particle updates.

    :param kind: ``"rbf"`` or ``"spectral"``
    :param bandwidth: RBF bandwidth; None means median bandwidth recomputed
        from the particles
    :param basis: spectral basis (spectral kernels only)
    :param clamp: clamp out-of-domain arguments of tabulated spectral
        kernels to the grid instead of raising
    """

    def __init__(
        self,
        kind: str,
        bandwidth: Optional[float] = None,
        basis: Optional[SpectralBasis] = None,
        clamp: bool = True,
    ):
        kind = str(kind).lower()
        if kind not in KERNEL_KINDS:
            raise InvalidSpecError(
                f"Unknown kernel kind {kind!r}, expected one of {KERNEL_KINDS}"
            )
        if kind == "spectral" and basis is None:
            raise InvalidSpecError("Spectral kernels need a basis")
        if bandwidth is not None and not bandwidth > 0:
            raise InvalidSpecError(f"RBF bandwidth must be > 0, found {bandwidth}")
        self.kind = kind
        self.bandwidth = bandwidth
        self.fixed_bandwidth = bandwidth is not None
        self.basis = basis
        self.clamp = clamp
        self.clamp_events = 0

    def __repr__(self):
        if self.kind == "rbf":
            return f"{self.__class__.__name__}(rbf, bandwidth={self.bandwidth})"
        return f"{self.__class__.__name__}(spectral, {self.basis!r})"

    def update_bandwidth(self, positions: FloatArray) -> float:
        """Recompute the median bandwidth unless it is fixed. A single
        particle has no pairwise distances and gets bandwidth 1."""
        if self.fixed_bandwidth:
            return self.bandwidth
        if np.asarray(positions).shape[0] < 2:
            self.bandwidth = 1.0
        else:
            self.bandwidth = rbf_median_bandwidth(positions)
        return self.bandwidth

    def _checked_bandwidth(self) -> float:
        if self.bandwidth is None or not self.bandwidth > 0:
            raise InvalidSpecError(
                f"RBF bandwidth must be > 0 when evaluated, found {self.bandwidth}"
            )
        return self.bandwidth

    def count_clamps(self, *points: PointsLike) -> None:
        if self.kind != "spectral" or not hasattr(self.basis, "grid"):
            return
        for p in points:
            inside = self.basis.grid.contains(np.asarray(p, dtype=np.float64))
            self.clamp_events += int(np.count_nonzero(~inside))


def rbf_median_bandwidth(positions: PointsLike) -> float:
    """``med² / ln N`` with `med` the median pairwise distance; 1 if all
    points coincide.
    :param positions: ``(N,)`` or ``(N, d)`` points, ``N >= 2``"""
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim == 1:
        positions = positions[:, np.newaxis]
    n = positions.shape[0]
    if n < 2:
        raise InsufficientDataError(
            f"Median bandwidth needs at least 2 particles, found {n}"
        )
    med = float(np.median(pdist(positions)))
    if med == 0.0:
        return 1.0
    return med**2 / np.log(n)


def _sq_dist(x, y):
    diff = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    if diff.ndim == 0:
        diff = diff.reshape(1)
    return diff, np.sum(diff**2, axis=-1)


def rbf_eval(x: PointLike, y: PointLike, bw: float) -> Union[float, FloatArray]:
    if not bw > 0:
        raise InvalidSpecError(f"RBF bandwidth must be > 0, found {bw}")
    _, sq = _sq_dist(x, y)
    result = np.exp(-sq / bw)
    return float(result) if np.ndim(result) == 0 else result


def rbf_grad2(x: PointLike, y: PointLike, bw: float) -> FloatArray:
    """``∇₂K(x, y) = (2 / bw) (x - y) K(x, y)``."""
    if not bw > 0:
        raise InvalidSpecError(f"RBF bandwidth must be > 0, found {bw}")
    diff, sq = _sq_dist(x, y)
    return (2.0 / bw) * diff * np.exp(-sq / bw)[..., np.newaxis]


def rbf_grad1(x: PointLike, y: PointLike, bw: float) -> FloatArray:
    """``∇₁K(x, y) = ∇₂K(y, x)``."""
    return rbf_grad2(y, x, bw)


def kernel_eval(
    handle: KernelHandle, x: PointLike, y: PointLike
) -> Union[float, FloatArray]:
    if handle.kind == "rbf":
        return rbf_eval(x, y, handle._checked_bandwidth())
    if handle.clamp:
        handle.count_clamps(x, y)
    return spectral_kernel_eval(handle.basis, x, y, clamp=handle.clamp)


def kernel_grad1(handle: KernelHandle, x: PointLike, y: PointLike) -> FloatArray:
    if handle.kind == "rbf":
        return rbf_grad1(x, y, handle._checked_bandwidth())
    if handle.clamp:
        handle.count_clamps(x, y)
    return spectral_kernel_grad1(handle.basis, x, y, clamp=handle.clamp)


def kernel_grad2(handle: KernelHandle, x: PointLike, y: PointLike) -> FloatArray:
    if handle.kind == "rbf":
        return rbf_grad2(x, y, handle._checked_bandwidth())
    if handle.clamp:
        handle.count_clamps(x, y)
    return spectral_kernel_grad2(handle.basis, x, y, clamp=handle.clamp)
