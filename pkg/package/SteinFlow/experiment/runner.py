#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.experiment.runner` --- Experiment runner
==========================================================

Builds target, grid and kernel from an :class:`ExperimentConfig`, runs a
particle sampler or a density flow and writes the run directory:

=====================  ====================================================
file                   content
=====================  ====================================================
``config.json``        resolved configuration
``positions.csv``      ``iteration, particle, x0[, x1]`` (particle methods)
``diagnostics.csv``    ``iteration, kl, chi2, w1, clamps`` (particle methods)
``densities.csv``      ``t, node_index, x, mu`` (flows)
``divergences.csv``    ``t, kl, chi2`` (flows)
``bounds.csv``         divergences against convergence bounds (flows)
``plot.dat``           gnuplot data
``plot.gp``            gnuplot script
``manifest.yaml``      run manifest
``<name>.log``         log
=====================  ====================================================
"""
from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
import yaml

from SteinFlow.analysis.bounds import check_bounds
from SteinFlow.analysis.diagnostics import (
    fit_decay_rate,
    kde_on_grid,
    mixture_mode_edges,
    mode_masses,
)
from SteinFlow.analysis.results import Results
from SteinFlow.core.consts import CSV_FLOAT_FORMAT
from SteinFlow.core.errors import ConfigError, InsufficientDataError, NumericAbort
from SteinFlow.core.sftypes import PathOrStr
from SteinFlow.core.utils import get_header, get_subheader
from SteinFlow.dynamics.particles import RunRecord, SnapshotPlan, StepSchedule, run
from SteinFlow.experiment.config import ExperimentConfig
from SteinFlow.flows.density import FlowRecord, evolve
from SteinFlow.kernels.kernels import KernelHandle
from SteinFlow.spectral.basis import SpectralBasis, hermite_basis
from SteinFlow.spectral.cache import basis_fingerprint, cached_basis
from SteinFlow.targets.mixture import normalized_pdf_on_grid

__all__ = ["RunManifest", "run_experiment", "warm_basis_cache", "write_csv"]

logger = logging.getLogger(__name__)


class RunManifest(Results):
    """Record of one experiment run.

    Keys: ``config`` (resolved configuration), ``version``, ``wall_time``,
    ``files`` (file name -> row count), ``events`` (clamps, aborts) and
    ``summary`` (final divergences, decay rates, mode masses)."""

    def validate(self, out: PathOrStr) -> bool:
        """Whether every listed file exists in `out` and is non-empty."""
        out = Path(out)
        return all(
            (out / name).is_file() and (out / name).stat().st_size > 0
            for name in self.files
        )

    def to_yaml(self) -> str:
        return yaml.safe_dump(_plain(dict(self)), sort_keys=False)


def _plain(value):
    """Builtin types for YAML output."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _version() -> str:
    from SteinFlow import __version__

    return __version__


def write_csv(df: pd.DataFrame, path: Path) -> int:
    """Write `df` with the fixed float format; returns the row count."""
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return len(df)


def _write_plot(out: Path, df: pd.DataFrame, script: str) -> Dict[str, int]:
    with open(out / "plot.dat", "w", encoding="UTF-8") as plot_file:
        plot_file.write("# " + " ".join(df.columns) + "\n")
        df.to_csv(
            plot_file,
            sep=" ",
            header=False,
            index=False,
            float_format=CSV_FLOAT_FORMAT,
        )
    (out / "plot.gp").write_text(script, encoding="UTF-8")
    return {"plot.dat": len(df), "plot.gp": script.count("\n")}


def _spectral_basis(config: ExperimentConfig) -> SpectralBasis:
    kernel = config.kernel
    if kernel["basis"] == "hermite":
        logger.finfo(f"Using {kernel['k']} Hermite eigenfunctions")
        return hermite_basis(kernel["k"])
    return cached_basis(config.target, config.grid, kernel["k"], kernel["basis_cache"])


def _kernel_handle(config: ExperimentConfig) -> KernelHandle:
    kernel = config.kernel
    if kernel["kind"] == "rbf":
        return KernelHandle("rbf", bandwidth=kernel["bandwidth"])
    return KernelHandle("spectral", basis=_spectral_basis(config))


def warm_basis_cache(config: ExperimentConfig) -> Path:
    """Compute the finite-difference eigenbasis of `config` into its cache
    directory."""
    kernel = config.kernel
    if kernel["kind"] != "spectral" or kernel["basis"] != "fd":
        raise ConfigError("kernel.basis", "only finite-difference bases are cached")
    if kernel["basis_cache"] is None:
        raise ConfigError("kernel.basis_cache", "no cache directory configured")
    logger.info(get_header("Eigenbasis cache"))
    cached_basis(config.target, config.grid, kernel["k"], kernel["basis_cache"])
    path = (
        Path(kernel["basis_cache"])
        / f"{basis_fingerprint(config.target, config.grid, kernel['k'])}.zarr"
    )
    logger.finfo(f"Basis cache ready at {str(path)!r}")
    return path


# particle methods

PARTICLE_SCRIPT_1D = """set title "{title}"
set xlabel "x"
set ylabel "density"
plot "plot.dat" using 1:2 with lines title "target", \\
     "plot.dat" using 1:3 with lines title "particles (KDE)"
"""

PARTICLE_SCRIPT_2D = """set title "{title}"
set xlabel "x0"
set ylabel "x1"
set size square
plot "plot.dat" using 1:2 with points pointtype 7 title "particles"
"""


def _particle_outputs(
    config: ExperimentConfig, record: RunRecord, out: Path
) -> Tuple[Dict[str, int], Dict[str, Any]]:
    files = {
        "positions.csv": write_csv(record.positions_frame(), out / "positions.csv"),
        "diagnostics.csv": write_csv(record.diagnostics, out / "diagnostics.csv"),
    }
    final = record.final_positions
    title = f"{config.name}: {config.method} at iteration {max(record.snapshots)}"
    grid = config.grid
    if grid.dimension == 1:
        plot_df = pd.DataFrame(
            {"x": grid.nodes, "target": normalized_pdf_on_grid(config.target, grid).values}
        )
        if final.shape[0] >= 2:
            plot_df["particles"] = kde_on_grid(final, grid).values
        script = PARTICLE_SCRIPT_1D.format(title=title)
    else:
        plot_df = pd.DataFrame(final, columns=["x0", "x1"])
        script = PARTICLE_SCRIPT_2D.format(title=title)
    files.update(_write_plot(out, plot_df, script))
    last = record.diagnostics.iloc[-1]
    summary = {
        "iterations": int(last["iteration"]),
        "kl": float(last["kl"]),
        "chi2": float(last["chi2"]),
        "w1": float(last["w1"]),
    }
    spec = config.target.spec
    if spec.n_components > 1:
        if grid.dimension == 1:
            summary["mode_masses"] = mode_masses(final, edges=mixture_mode_edges(spec))
        else:
            summary["mode_masses"] = mode_masses(final, centers=spec.means)
    return files, summary


def _run_particles(config: ExperimentConfig, out: Path):
    particles = config.particles
    kernel = _kernel_handle(config)
    schedule = StepSchedule.from_dict(config.schedule)
    snapshots = SnapshotPlan(**config.snapshots)
    pi_hat = (
        normalized_pdf_on_grid(config.target, config.grid)
        if config.grid.dimension == 1
        else None
    )
    events: Dict[str, Any] = {"abort": None}
    try:
        record = run(
            config.method,
            config.target,
            kernel,
            schedule,
            config.n_iters,
            snapshots,
            seed=config.seed,
            n_particles=particles["n"],
            box_lower=particles["lower"],
            box_upper=particles["upper"],
            grid=config.grid,
            pi_hat=pi_hat,
            bandwidth_every=config.kernel["bandwidth_every"],
            progress=config.progress,
        )
        abort = None
    except NumericAbort as e:
        record, abort = e.record, e
        events["abort"] = {
            "message": str(e),
            "particle": e.particle,
            "iteration": e.iteration,
        }
    events["clamps"] = record.clamp_events
    files, summary = _particle_outputs(config, record, out)
    return files, events, summary, abort


# density flows

FLOW_SCRIPT = """set title "{title}"
set xlabel "t"
set logscale y
set format y "%.0e"
plot "plot.dat" using 1:2 with lines title "KL", \\
     "plot.dat" using 1:3 with lines title "chi-squared"
"""


def _flow_outputs(
    config: ExperimentConfig, record: FlowRecord, out: Path
) -> Tuple[Dict[str, int], Dict[str, Any]]:
    target = config.target
    divergences = record.divergences
    bounds = check_bounds(
        divergences,
        record.kind.value,
        poincare_constant=target.poincare_constant,
        lsi_constant=target.lsi_constant,
        log_concave=target.is_standard_gaussian,
    )
    files = {
        "densities.csv": write_csv(record.densities_frame(), out / "densities.csv"),
        "divergences.csv": write_csv(divergences, out / "divergences.csv"),
        "bounds.csv": write_csv(bounds, out / "bounds.csv"),
    }
    files.update(
        _write_plot(
            out,
            divergences,
            FLOW_SCRIPT.format(title=f"{config.name}: {config.method}"),
        )
    )
    summary = {
        "T": float(divergences["t"].iloc[-1]),
        "kl": float(divergences["kl"].iloc[-1]),
        "chi2": float(divergences["chi2"].iloc[-1]),
        "substeps": record.substeps,
        "bounds_satisfied": bool(bounds["satisfied"].all()),
    }
    for quantity in ("kl", "chi2"):
        try:
            fit = fit_decay_rate(divergences[["t", quantity]])
        except InsufficientDataError:
            summary[f"{quantity}_rate"] = None
        else:
            summary[f"{quantity}_rate"] = fit.rate
    return files, summary


def _run_flow(config: ExperimentConfig, out: Path):
    basis = _spectral_basis(config) if config.method == "lawgd_flow" else None
    mu0 = normalized_pdf_on_grid(config.initial, config.grid)
    record = evolve(
        config.method,
        mu0,
        config.target,
        basis=basis,
        T=config["T"],
        dt=config.dt,
        record_every=config.record_every,
        snapshot_every=config.snapshots["every"] or 1,
        progress=config.progress,
    )
    files, summary = _flow_outputs(config, record, out)
    return files, {"abort": None}, summary, None


def run_experiment(
    config: ExperimentConfig, out: Optional[PathOrStr] = None
) -> RunManifest:
    """Run the experiment described by `config` and write its outputs.
    :param config: validated configuration
    :param out: output directory, the configured one if None
    :return: run manifest
    :raises NumericAbort: after writing the partial outputs of an aborted
        particle run"""
    out = Path(out if out is not None else config.output)
    out.mkdir(parents=True, exist_ok=True)
    logger.set_file_name(out, config.name)
    start = time.perf_counter()
    try:
        logger.info(get_header(f"{config.name}: {config.method}"))
        if config.description:
            logger.finfo(config.description)
        (out / "config.json").write_text(config.to_json(), encoding="UTF-8")
        if config.is_flow:
            files, events, summary, abort = _run_flow(config, out)
        else:
            files, events, summary, abort = _run_particles(config, out)
        manifest = RunManifest(
            config=config.to_dict(),
            version=_version(),
            wall_time=time.perf_counter() - start,
            files={"config.json": 1, **files},
            events=events,
            summary=summary,
        )
        (out / "manifest.yaml").write_text(manifest.to_yaml(), encoding="UTF-8")
        manifest.files["manifest.yaml"] = 1
        logger.info(get_subheader("Outputs"))
        for name, rows in manifest.files.items():
            logger.finfo(f"{rows}", kwd_str=f"\t{name}: ")
        if abort is not None:
            raise abort
        logger.finfo(f"Finished in {manifest.wall_time:.2f} s")
        return manifest
    finally:
        logger.close_file()
