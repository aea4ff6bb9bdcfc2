#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.dynamics.particles` --- Interacting particle samplers
========================================================================

Simultaneous (Jacobi) updates of a particle ensemble :math:`X_t \in
\mathbb{R}^{N \times d}`:

SVGD

.. math:: X^i \leftarrow X^i - \frac{h}{N} \sum_j K(X^i, X^j) \nabla V(X^j)
          + \frac{h}{N} \sum_j \nabla_2 K(X^i, X^j)

LAWGD

.. math:: X^i \leftarrow X^i - \frac{h}{N} \sum_j \nabla_1 K_L(X^i, X^j)

Both sums include :math:`j = i`.
"""
from __future__ import annotations

import logging
import time
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numba
import numpy as np
import pandas as pd
from numba import njit, prange
from tqdm.auto import tqdm

from SteinFlow.analysis.diagnostics import divergence_report
from SteinFlow.core.consts import GUARD_FACTOR, LINE_LENGTH, THREADS
from SteinFlow.core.errors import InvalidSpecError, NumericAbort
from SteinFlow.core.sftypes import FloatArray
from SteinFlow.grid.grids import Grid, GridDensity
from SteinFlow.kernels.kernels import KernelHandle
from SteinFlow.targets.mixture import TargetDistribution

__all__ = [
    "ParticleEnsemble",
    "StepSchedule",
    "SnapshotPlan",
    "RunRecord",
    "init_uniform",
    "svgd_step",
    "lawgd_step",
    "run",
]

logger = logging.getLogger(__name__)

DYNAMICS_KINDS = ("svgd", "lawgd")
SCHEDULE_KINDS = ("constant", "decay")


class ParticleEnsemble:
    """Particle positions ``(N, d)`` at iteration `iteration`."""

    def __init__(self, positions: FloatArray, iteration: int = 0):
        positions = np.array(positions, dtype=np.float64)
        if positions.ndim == 1:
            positions = positions[:, np.newaxis]
        if positions.ndim != 2 or positions.shape[0] < 1:
            raise InvalidSpecError(
                f"Expected positions of shape (N, d) with N >= 1, found {positions.shape}"
            )
        if not np.all(np.isfinite(positions)):
            bad = int(np.argmax(~np.all(np.isfinite(positions), axis=1)))
            raise NumericAbort("Non-finite particle position", bad, iteration)
        self.positions = positions
        self.iteration = int(iteration)

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(N={self.n_particles}, d={self.dimension}, "
            f"iteration={self.iteration})"
        )

    def __len__(self):
        return self.n_particles

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def copy(self) -> ParticleEnsemble:
        return self.__class__(self.positions.copy(), self.iteration)


class StepSchedule:
    """Step sizes ``h_t = h0 / (1 + t)^gamma``, optionally ramped up
    linearly over the first `warmup` iterations.

    :param kind: ``"constant"`` or ``"decay"``
    :param h0: initial step size ``> 0``
    :param gamma: decay exponent in ``[0, 1]`` (ignored for constant steps)
    :param warmup: number of ramp-up iterations, 0 for none
    """

    def __init__(
        self,
        kind: str = "constant",
        h0: float = 0.05,
        gamma: float = 0.0,
        warmup: int = 0,
    ):
        kind = str(kind).lower()
        if kind not in SCHEDULE_KINDS:
            raise InvalidSpecError(
                f"Unknown schedule kind {kind!r}, expected one of {SCHEDULE_KINDS}"
            )
        if not h0 > 0:
            raise InvalidSpecError(f"Step size must be > 0, found {h0}")
        if not 0.0 <= gamma <= 1.0:
            raise InvalidSpecError(f"Decay exponent must be in [0, 1], found {gamma}")
        if int(warmup) != warmup or warmup < 0:
            raise InvalidSpecError(f"Warm-up must be a non-negative integer, found {warmup}")
        self.kind = kind
        self.h0 = float(h0)
        self.gamma = float(gamma) if kind == "decay" else 0.0
        self.warmup = int(warmup)

    def __repr__(self):
        return (
            f"{self.__class__.__name__}({self.kind}, h0={self.h0}, "
            f"gamma={self.gamma}, warmup={self.warmup})"
        )

    def __call__(self, t: int) -> float:
        h = self.h0 / (1.0 + t) ** self.gamma
        if self.warmup:
            h *= min(1.0, (t + 1) / self.warmup)
        return h

    @classmethod
    def from_dict(cls, spec: Dict) -> StepSchedule:
        return cls(**spec)


class SnapshotPlan:
    """Iterations at which positions are recorded: every `every` iterations
    and at the explicit iterations `at`.  The initial and final iterations
    are always included."""

    def __init__(self, every: Optional[int] = None, at: Sequence[int] = ()):
        if every is not None and (int(every) != every or every < 1):
            raise InvalidSpecError(f"Snapshot interval must be >= 1, found {every}")
        if any(int(i) != i or i < 0 for i in at):
            raise InvalidSpecError(f"Snapshot iterations must be >= 0, found {list(at)}")
        self.every = None if every is None else int(every)
        self.at = tuple(sorted({int(i) for i in at}))

    def __repr__(self):
        return f"{self.__class__.__name__}(every={self.every}, at={list(self.at)})"

    def iterations(self, n_iters: int) -> List[int]:
        selected = {0, n_iters}
        if self.every is not None:
            selected.update(range(0, n_iters + 1, self.every))
        selected.update(i for i in self.at if i <= n_iters)
        return sorted(selected)


class RunRecord:
    """Snapshots, diagnostics and bookkeeping of one particle run."""

    def __init__(self, kind: str, dimension: int):
        self.kind = kind
        self.dimension = dimension
        self.snapshots: Dict[int, FloatArray] = {}
        self._diagnostics: List[Dict[str, float]] = []
        self.step_sizes: List[float] = []
        self.clamp_events = 0
        self.wall_time = 0.0
        self.abort: Optional[NumericAbort] = None

    def __repr__(self):
        return (
            f"{self.__class__.__name__}({self.kind}, "
            f"{len(self.snapshots)} snapshots, clamps={self.clamp_events})"
        )

    def add_snapshot(
        self,
        ensemble: ParticleEnsemble,
        clamps: int,
        pi_hat: Optional[GridDensity] = None,
        target: Optional[TargetDistribution] = None,
    ) -> None:
        iteration = ensemble.iteration
        if self.snapshots and iteration <= max(self.snapshots):
            raise ValueError(
                f"Snapshot iterations must increase, found {iteration} after "
                f"{max(self.snapshots)}"
            )
        self.snapshots[iteration] = ensemble.positions.copy()
        row = {"iteration": iteration, "kl": np.nan, "chi2": np.nan, "w1": np.nan}
        if pi_hat is not None:
            report = divergence_report(ensemble.positions, target, pi_hat)
            row.update(kl=report.kl, chi2=report.chi2, w1=report.w1)
        row["clamps"] = clamps
        self._diagnostics.append(row)

    @property
    def iterations(self) -> List[int]:
        return list(self.snapshots)

    @property
    def final_positions(self) -> FloatArray:
        return self.snapshots[max(self.snapshots)]

    @property
    def diagnostics(self) -> pd.DataFrame:
        return pd.DataFrame(
            self._diagnostics, columns=["iteration", "kl", "chi2", "w1", "clamps"]
        )

    def positions_frame(self) -> pd.DataFrame:
        """Long table with columns ``iteration, particle, x0[, x1]``."""
        frames = []
        for iteration, positions in self.snapshots.items():
            frame = pd.DataFrame(
                positions, columns=[f"x{a}" for a in range(positions.shape[1])]
            )
            frame.insert(0, "particle", np.arange(positions.shape[0]))
            frame.insert(0, "iteration", iteration)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)


def init_uniform(
    n_particles: int,
    box_lower: Union[float, Sequence[float]],
    box_upper: Union[float, Sequence[float]],
    seed: Optional[int] = None,
    dimension: Optional[int] = None,
) -> ParticleEnsemble:
    """I.i.d. uniform positions in the box ``[box_lower, box_upper]``.
    :param n_particles: number of particles ``N >= 1``
    :param box_lower: lower corner, scalar or per coordinate
    :param box_upper: upper corner, scalar or per coordinate
    :param seed: seed of :func:`numpy.random.default_rng`
    :param dimension: dimension when both corners are scalars"""
    if isinstance(n_particles, bool) or int(n_particles) != n_particles or n_particles < 1:
        raise InvalidSpecError(f"Number of particles must be >= 1, found {n_particles}")
    lower = np.atleast_1d(np.asarray(box_lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(box_upper, dtype=np.float64))
    if dimension is None:
        dimension = max(lower.shape[0], upper.shape[0])
    lower = np.broadcast_to(lower, (dimension,))
    upper = np.broadcast_to(upper, (dimension,))
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))) or np.any(
        lower >= upper
    ):
        raise InvalidSpecError(
            f"Invalid initialisation box [{lower.tolist()}, {upper.tolist()}]"
        )
    rng = np.random.default_rng(seed)
    positions = rng.uniform(lower, upper, size=(int(n_particles), dimension))
    return ParticleEnsemble(positions, 0)


@njit(nogil=True, parallel=True)
def _svgd_rbf_velocity(x, grad_v, bw):
    n, d = x.shape
    velocity = np.zeros_like(x)
    for i in prange(n):
        for j in range(n):
            sq = 0.0
            for a in range(d):
                diff = x[i, a] - x[j, a]
                sq += diff * diff
            k = np.exp(-sq / bw)
            for a in range(d):
                velocity[i, a] += (2.0 / bw) * (x[i, a] - x[j, a]) * k - k * grad_v[j, a]
        for a in range(d):
            velocity[i, a] /= n
    return velocity


def _svgd_spectral_velocity(x, grad_v, kernel: KernelHandle):
    values, gradients, n_clamped = kernel.basis.evaluate(x, clamp=kernel.clamp)
    kernel.clamp_events += n_clamped
    drive = gradients.sum(axis=2) - values @ grad_v
    return np.einsum(
        "ni,na->ia", values / kernel.basis.eigenvalues[:, np.newaxis], drive
    ) / x.shape[0]


def _advance(ensemble: ParticleEnsemble, velocity: FloatArray, h: float):
    new = ensemble.positions + h * velocity
    finite = np.all(np.isfinite(new), axis=1)
    if not np.all(finite):
        raise NumericAbort(
            "Non-finite particle update", int(np.argmin(finite)), ensemble.iteration
        )
    return ParticleEnsemble(new, ensemble.iteration + 1)


def svgd_step(
    ensemble: ParticleEnsemble,
    target: TargetDistribution,
    kernel: KernelHandle,
    h: float,
) -> ParticleEnsemble:
    """One simultaneous SVGD update of all particles."""
    x = ensemble.positions
    with np.errstate(over="ignore", invalid="ignore"):
        grad_v = np.asarray(target.grad_potential(x), dtype=np.float64).reshape(
            x.shape
        )
        if kernel.kind == "rbf":
            velocity = _svgd_rbf_velocity(x, grad_v, kernel._checked_bandwidth())
        else:
            velocity = _svgd_spectral_velocity(x, grad_v, kernel)
        return _advance(ensemble, velocity, h)


def lawgd_step(
    ensemble: ParticleEnsemble, kernel: KernelHandle, h: float
) -> ParticleEnsemble:
    """One simultaneous LAWGD update, using only the spectral kernel."""
    if kernel.kind != "spectral":
        raise InvalidSpecError("LAWGD needs a spectral kernel")
    x = ensemble.positions
    basis = kernel.basis
    values, gradients, n_clamped = basis.evaluate(x, clamp=kernel.clamp)
    kernel.clamp_events += n_clamped
    weights = values.sum(axis=1) / basis.eigenvalues
    with np.errstate(over="ignore", invalid="ignore"):
        velocity = -np.einsum("nai,n->ia", gradients, weights) / x.shape[0]
        return _advance(ensemble, velocity, h)


def _set_threads():
    if THREADS is None:
        return
    n_threads = min(int(THREADS), numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(max(n_threads, 1))


def _check_guard(ensemble: ParticleEnsemble, center: FloatArray, radius: float):
    outside = np.any(np.abs(ensemble.positions - center) > radius, axis=1)
    if np.any(outside):
        raise NumericAbort(
            f"Particle left the guard region of radius {radius:.4g}",
            int(np.argmax(outside)),
            ensemble.iteration,
        )


def run(
    kind: str,
    target: TargetDistribution,
    kernel: KernelHandle,
    schedule: StepSchedule,
    n_iters: int,
    snapshots: Union[SnapshotPlan, Iterable[int]],
    seed: Optional[int] = None,
    n_particles: int = 100,
    box_lower: Union[float, Sequence[float]] = -1.0,
    box_upper: Union[float, Sequence[float]] = 1.0,
    initial: Optional[ParticleEnsemble] = None,
    grid: Optional[Grid] = None,
    pi_hat: Optional[GridDensity] = None,
    bandwidth_every: int = 1,
    progress: bool = False,
    raise_on_abort: bool = True,
) -> RunRecord:
    """Iterate SVGD or LAWGD and record snapshots.

    :param kind: ``"svgd"`` or ``"lawgd"``
    :param target: target distribution
    :param kernel: kernel handle
    :param schedule: step sizes
    :param n_iters: number of iterations
    :param snapshots: snapshot plan or explicit iterations
    :param seed: seed of the uniform initialisation
    :param n_particles: number of particles of the uniform initialisation
    :param box_lower: lower corner of the initialisation box
    :param box_upper: upper corner of the initialisation box
    :param initial: initial ensemble, replaces the uniform initialisation
    :param grid: grid defining the divergence guard region
    :param pi_hat: target density on a 1D grid for snapshot divergences
    :param bandwidth_every: iterations between median bandwidth updates
    :param progress: show a progress bar
    :param raise_on_abort: re-raise guard aborts with the partial record
        attached as ``record``, otherwise return the partial record
    """
    kind = str(kind).lower()
    if kind not in DYNAMICS_KINDS:
        raise InvalidSpecError(
            f"Unknown dynamics {kind!r}, expected one of {DYNAMICS_KINDS}"
        )
    if int(n_iters) != n_iters or n_iters < 0:
        raise InvalidSpecError(f"Number of iterations must be >= 0, found {n_iters}")
    if kind == "lawgd" and kernel.kind != "spectral":
        raise InvalidSpecError("LAWGD needs a spectral kernel")
    if not isinstance(snapshots, SnapshotPlan):
        snapshots = SnapshotPlan(at=list(snapshots))
    snapshot_iterations = set(snapshots.iterations(int(n_iters)))
    if initial is None:
        ensemble = init_uniform(
            n_particles, box_lower, box_upper, seed, dimension=target.dimension
        )
    else:
        ensemble = initial.copy()
    if ensemble.dimension != target.dimension:
        raise InvalidSpecError(
            f"Particles of dimension {ensemble.dimension} do not match the "
            f"{target.dimension}D target"
        )
    if grid is not None:
        guard_center, guard_radius = grid.center, GUARD_FACTOR * grid.half_width
    else:
        guard_center, guard_radius = np.zeros(ensemble.dimension), np.inf
    _set_threads()
    record = RunRecord(kind, ensemble.dimension)
    logger.finfo(
        f"Running {kind.upper()} with {ensemble.n_particles} particles for "
        f"{n_iters} iterations, {kernel!r}, {schedule!r}"
    )
    start = time.perf_counter()
    record.add_snapshot(ensemble, kernel.clamp_events, pi_hat, target)
    try:
        for t in tqdm(
            range(int(n_iters)),
            disable=not progress,
            ncols=LINE_LENGTH,
            bar_format="\t{l_bar}{bar}| {n_fmt}/{total} iterations, {elapsed_s:3.0f} s elapsed",
        ):
            h = schedule(t)
            record.step_sizes.append(h)
            if kind == "svgd":
                if kernel.kind == "rbf" and t % bandwidth_every == 0:
                    kernel.update_bandwidth(ensemble.positions)
                ensemble = svgd_step(ensemble, target, kernel, h)
            else:
                ensemble = lawgd_step(ensemble, kernel, h)
            _check_guard(ensemble, guard_center, guard_radius)
            if ensemble.iteration in snapshot_iterations:
                record.add_snapshot(ensemble, kernel.clamp_events, pi_hat, target)
    except NumericAbort as e:
        record.abort = e
        logger.warning(f"{kind.upper()} run aborted: {e}")
        if raise_on_abort:
            e.record = record
            raise
    finally:
        record.clamp_events = kernel.clamp_events
        record.wall_time = time.perf_counter() - start
    if record.clamp_events:
        logger.finfo(f"{record.clamp_events} kernel evaluations clamped to the grid")
    logger.finfo(f"Finished {kind.upper()} run in {record.wall_time:.2f} s")
    return record
