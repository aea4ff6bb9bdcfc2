#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.flows.density` --- Density flows on a 1D grid
=================================================================

Explicit finite-volume integration of the continuity equation
:math:`\partial_t \mu = -\mathrm{div}(\mu v)` for

* the chi-squared flow (CSF), :math:`v = -2 \nabla(\mu / \pi)`
* the LAWGD density flow, :math:`v = -\nabla L^{-1}(\mu / \pi - 1)`

Face fluxes use central-averaged node velocities and upwind densities with
zero flux through the domain boundary, so quadrature mass is conserved to
rounding.
"""
from __future__ import annotations

import logging
import math
import time
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from tqdm.auto import tqdm

from SteinFlow.analysis.diagnostics import chi2_grid, kl_grid
from SteinFlow.core.consts import DENSITY_FLOOR, LINE_LENGTH
from SteinFlow.core.errors import InstabilityError, InvalidSpecError
from SteinFlow.core.sftypes import FloatArray
from SteinFlow.grid.grids import GridDensity, GridFunction
from SteinFlow.grid.stencils import fd_gradient
from SteinFlow.spectral.basis import GridSpectralBasis
from SteinFlow.targets.mixture import TargetDistribution, normalized_pdf_on_grid

__all__ = [
    "FlowKind",
    "FlowRecord",
    "csf_velocity",
    "lawgd_density_velocity",
    "max_stable_dt",
    "flow_step",
    "evolve",
]

logger = logging.getLogger(__name__)

CFL_NUMBER = 0.5
MAX_SUBSTEPS = 10**7


class FlowKind(str, Enum):
    CSF = "csf"
    LAWGD = "lawgd"

    @classmethod
    def parse(cls, kind: Union[str, FlowKind]) -> FlowKind:
        if isinstance(kind, cls):
            return kind
        name = str(kind).lower().removesuffix("_flow")
        try:
            return cls(name)
        except ValueError:
            raise InvalidSpecError(
                f"Unknown flow kind {kind!r}, expected one of "
                f"{[k.value for k in cls]}"
            ) from None


def _check_1d(mu: GridFunction):
    if mu.grid.dimension != 1:
        raise ValueError("Density flows are integrated on 1D grids only")


def _ratio(mu: GridDensity, target_pdf: GridDensity) -> FloatArray:
    if mu.grid != target_pdf.grid:
        raise ValueError("Density and target density live on different grids")
    return mu.values / np.maximum(target_pdf.values, DENSITY_FLOOR)


def csf_velocity(mu: GridDensity, target_pdf: GridDensity) -> GridFunction:
    """``v = -2 ∇(μ / π)``."""
    _check_1d(mu)
    ratio = GridFunction(mu.grid, _ratio(mu, target_pdf))
    return GridFunction(mu.grid, -2.0 * fd_gradient(ratio).values)


def lawgd_density_velocity(
    mu: GridDensity, target_pdf: GridDensity, basis: GridSpectralBasis
) -> GridFunction:
    """``v = -∇ Σ λᵢ⁻¹ φᵢ ⟨φᵢ, μ/π - 1⟩`` with ``L²(π̂)`` quadrature
    projections."""
    _check_1d(mu)
    if basis.grid != mu.grid:
        raise ValueError("Basis and density live on different grids")
    perturbation = _ratio(mu, target_pdf) - 1.0
    phi = basis.eigenfunction_values
    weights = perturbation * target_pdf.values * mu.grid.spacing
    projections = phi @ weights
    potential = (projections / basis.eigenvalues) @ phi
    return GridFunction(
        mu.grid, -fd_gradient(GridFunction(mu.grid, potential)).values
    )


def max_stable_dt(velocity: GridFunction) -> float:
    """Advective CFL limit ``0.5 ε / max|v|`` (inf for ``v ≡ 0``)."""
    vmax = float(np.max(np.abs(velocity.values)))
    if vmax == 0.0:
        return math.inf
    return CFL_NUMBER * velocity.grid.spacing / vmax


def _face_fluxes(mu: FloatArray, v: FloatArray) -> FloatArray:
    v_face = 0.5 * (v[:-1] + v[1:])
    mu_face = np.where(v_face > 0.0, mu[:-1], mu[1:])
    fluxes = np.zeros(mu.shape[0] + 1)
    fluxes[1:-1] = mu_face * v_face
    return fluxes


def flow_step(mu: GridDensity, velocity: GridFunction, dt: float) -> GridDensity:
    """Advance ``μ`` by `dt` in the frozen velocity field, sub-stepping to
    satisfy the CFL condition.
    :raises InstabilityError: if a node density drops below ``-1e-12``"""
    _check_1d(mu)
    if dt < 0:
        raise ValueError(f"Time step must be >= 0, found {dt}")
    v = velocity.values.reshape(-1)
    n_sub = max(1, math.ceil(dt / max_stable_dt(velocity))) if dt > 0 else 0
    h = dt / n_sub if n_sub else 0.0
    values = mu.values.copy()
    courant = h / mu.grid.spacing
    for _ in range(n_sub):
        values -= courant * np.diff(_face_fluxes(values, v))
    if np.min(values) < -GridDensity.negative_tol:
        node = int(np.argmin(values))
        raise InstabilityError(
            f"Negative density {values[node]:.3e} at node {node} after a step "
            f"of {dt:.3e}"
        )
    return GridDensity(mu.grid, values)


class FlowRecord:
    """Recorded times, density snapshots and divergence series of one flow."""

    def __init__(self, kind: FlowKind):
        self.kind = kind
        self.times: List[float] = []
        self.snapshots: Dict[float, GridDensity] = {}
        self._divergences: List[Dict[str, float]] = []
        self.substeps = 0
        self.wall_time = 0.0

    def __repr__(self):
        return (
            f"{self.__class__.__name__}({self.kind.value}, "
            f"{len(self.times)} records, {self.substeps} sub-steps)"
        )

    def add(self, t: float, mu: GridDensity, pi_hat: GridDensity, snapshot: bool):
        self.times.append(t)
        self._divergences.append(
            {"t": t, "kl": kl_grid(mu, pi_hat), "chi2": chi2_grid(mu, pi_hat)}
        )
        if snapshot:
            self.snapshots[t] = mu

    @property
    def divergences(self) -> pd.DataFrame:
        return pd.DataFrame(self._divergences, columns=["t", "kl", "chi2"])

    @property
    def final(self) -> GridDensity:
        return self.snapshots[max(self.snapshots)]

    def densities_frame(self) -> pd.DataFrame:
        """Long table with columns ``t, node_index, x, mu``."""
        frames = []
        for t, density in self.snapshots.items():
            frames.append(
                pd.DataFrame(
                    {
                        "t": t,
                        "node_index": np.arange(density.grid.n),
                        "x": density.grid.nodes,
                        "mu": density.values,
                    }
                )
            )
        return pd.concat(frames, ignore_index=True)


def evolve(
    kind: Union[str, FlowKind],
    mu0: GridDensity,
    target: TargetDistribution,
    basis: Optional[GridSpectralBasis] = None,
    T: float = 1.0,
    dt: float = 1e-3,
    record_every: Optional[float] = None,
    snapshot_every: int = 1,
    max_substeps: int = MAX_SUBSTEPS,
    progress: bool = False,
) -> FlowRecord:
    """Integrate a density flow up to time `T`.

    Each sub-step recomputes the velocity and uses the largest step
    ``<= dt`` satisfying the CFL condition (and, for CSF, the parabolic limit
    ``ε² / (8 max μ/π̂)``) without stepping past a record time.

    :param kind: ``"csf"`` or ``"lawgd"``
    :param mu0: initial density, unit mass
    :param target: target distribution
    :param basis: spectral basis on the grid of `mu0` (LAWGD only)
    :param T: final time
    :param dt: largest time step
    :param record_every: time between divergence records, `dt` if None
    :param snapshot_every: number of records between stored densities
    :param max_substeps: sub-step cap
    :param progress: show a progress bar
    """
    kind = FlowKind.parse(kind)
    _check_1d(mu0)
    if kind is FlowKind.LAWGD and basis is None:
        raise InvalidSpecError("The LAWGD density flow needs a spectral basis")
    if not (T >= 0 and dt > 0):
        raise InvalidSpecError(f"Need T >= 0 and dt > 0, found T={T}, dt={dt}")
    if abs(mu0.mass - 1.0) > 1e-8:
        raise InvalidSpecError(f"Initial density has mass {mu0.mass:.10f}, expected 1")
    if record_every is None:
        record_every = dt
    if not record_every > 0 or int(snapshot_every) < 1:
        raise InvalidSpecError("Record intervals must be positive")
    grid = mu0.grid
    pi_hat = normalized_pdf_on_grid(target, grid)
    n_records = int(math.floor(T / record_every + 1e-9))
    record_times = [k * record_every for k in range(1, n_records + 1)]
    if not record_times or T - record_times[-1] > 1e-12 * max(T, 1.0):
        record_times.append(T)
    record = FlowRecord(kind)
    logger.finfo(
        f"Integrating {kind.value.upper()} density flow to T = {T} with dt <= {dt} "
        f"on {grid!r}"
    )
    start = time.perf_counter()
    mu = mu0
    t = 0.0
    record.add(0.0, mu, pi_hat, snapshot=True)
    with tqdm(
        total=len(record_times),
        disable=not progress,
        ncols=LINE_LENGTH,
        bar_format="\t{l_bar}{bar}| {n_fmt}/{total} records, {elapsed_s:3.0f} s elapsed",
    ) as pbar:
        for n_record, t_record in enumerate(record_times, start=1):
            while t_record - t > 1e-12 * max(t_record, 1.0):
                if kind is FlowKind.CSF:
                    velocity = csf_velocity(mu, pi_hat)
                    r_max = float(np.max(_ratio(mu, pi_hat)))
                    h = min(dt, grid.spacing**2 / (8.0 * max(r_max, 1e-12)))
                else:
                    velocity = lawgd_density_velocity(mu, pi_hat, basis)
                    h = dt
                h = min(h, max_stable_dt(velocity), t_record - t)
                mu = flow_step(mu, velocity, h)
                t += h
                record.substeps += 1
                if record.substeps > max_substeps:
                    raise InstabilityError(
                        f"Exceeded {max_substeps} sub-steps at t = {t:.6g}"
                    )
            t = t_record
            last = n_record == len(record_times)
            record.add(t, mu, pi_hat, snapshot=last or n_record % snapshot_every == 0)
            pbar.update(1)
    record.wall_time = time.perf_counter() - start
    logger.finfo(
        f"Finished after {record.substeps} sub-steps in {record.wall_time:.2f} s, "
        f"KL = {record.divergences['kl'].iloc[-1]:.4e}"
    )
    return record
