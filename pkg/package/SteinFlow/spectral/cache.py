#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.spectral.cache` --- On-disk basis cache
==========================================================

Tabulated bases are stored as zarr groups ``<cache>/<fingerprint>.zarr``:

- attributes ``format_version``, ``fingerprint``, ``k``, ``grid``,
  ``closure``
- arrays ``eigenvalues (k,)``, ``eigenfunctions (k, *grid.shape)`` and
  ``gradients (k, d, *grid.shape)`` in float64

The fingerprint is the SHA-256 of the canonical JSON of target
specification, grid specification, requested mode count and boundary
closure.
"""
from __future__ import annotations

import logging
import shutil
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import zarr
from zarr.errors import GroupNotFoundError, PathNotFoundError

from SteinFlow.core.sftypes import PathOrStr
from SteinFlow.core.utils import fingerprint
from SteinFlow.grid.grids import Grid, make_grid
from SteinFlow.spectral.basis import GridSpectralBasis, build_basis
from SteinFlow.targets.mixture import TargetDistribution

__all__ = [
    "CACHE_FORMAT_VERSION",
    "basis_fingerprint",
    "save_basis",
    "load_basis",
    "cached_basis",
]

logger = logging.getLogger(__name__)

CACHE_FORMAT_VERSION = 1
CLOSURE = "dirichlet"


def basis_fingerprint(
    target: TargetDistribution, grid: Grid, k: Optional[int]
) -> str:
    return fingerprint(
        {
            "target": target.to_dict(),
            "grid": grid.spec(),
            "k": k,
            "closure": CLOSURE,
        }
    )


def save_basis(
    basis: GridSpectralBasis,
    path: PathOrStr,
    basis_id: str,
    attrs: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write `basis` to the zarr group at `path`, replacing existing data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    root = zarr.open_group(str(path), mode="w")
    root.attrs.update(
        {
            "format_version": CACHE_FORMAT_VERSION,
            "fingerprint": basis_id,
            "k": basis.k,
            "grid": basis.grid.spec(),
            "closure": CLOSURE,
            **(attrs or {}),
        }
    )
    root.create_dataset("eigenvalues", data=basis.eigenvalues)
    root.create_dataset("eigenfunctions", data=basis.eigenfunction_values)
    root.create_dataset("gradients", data=basis.gradient_values)
    return path


def load_basis(path: PathOrStr, basis_id: str) -> Optional[GridSpectralBasis]:
    """Read a cached basis; None if absent, unreadable or stale."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        root = zarr.open_group(str(path), mode="r")
        attrs = root.attrs.asdict()
        if (
            attrs.get("fingerprint") != basis_id
            or attrs.get("format_version") != CACHE_FORMAT_VERSION
        ):
            logger.warning(f"Ignoring stale basis cache {str(path)!r}")
            return None
        grid = make_grid(attrs["grid"])
        return GridSpectralBasis(
            grid,
            np.asarray(root["eigenvalues"][:]),
            np.asarray(root["eigenfunctions"][:]),
            np.asarray(root["gradients"][:]),
        )
    except (GroupNotFoundError, PathNotFoundError, KeyError, ValueError) as e:
        logger.warning(f"Could not read basis cache {str(path)!r}: {e}")
        return None


def cached_basis(
    target: TargetDistribution,
    grid: Grid,
    k: Optional[int],
    cache_dir: Optional[PathOrStr] = None,
) -> GridSpectralBasis:
    """Load the basis for (`target`, `grid`, `k`) from `cache_dir` or build
    and store it."""
    if cache_dir is None:
        return build_basis(target, grid, k)
    basis_id = basis_fingerprint(target, grid, k)
    path = Path(cache_dir) / f"{basis_id}.zarr"
    basis = load_basis(path, basis_id)
    if basis is not None:
        logger.finfo(f"Loaded spectral basis from {str(path)!r}")
        return basis
    basis = build_basis(target, grid, k)
    if path.exists():
        shutil.rmtree(path)
    save_basis(basis, path, basis_id)
    logger.finfo(f"Stored spectral basis in {str(path)!r}")
    return basis
