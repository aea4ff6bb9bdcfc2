#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.experiment.config` --- Experiment configuration
==================================================================

JSON (or YAML) experiment configurations with strict key checking.
Missing entries are filled from ``config/defaults.yaml``; every error names
the dotted path of the offending entry.
"""
from __future__ import annotations

import copy
import json
import logging
from numbers import Integral, Real
from typing import Any, Dict, Optional

import yaml

from SteinFlow.core.errors import ConfigError, InvalidSpecError
from SteinFlow.core.parsing import _Args
from SteinFlow.core.utils import get_file_or_str
from SteinFlow.experiment.consts import (
    DEFAULT_HERMITE_MODES,
    EXPERIMENT_DEFAULTS,
    FLOW_METHODS,
    METHODS,
    PARTICLE_METHODS,
)
from SteinFlow.grid.grids import Grid, make_grid
from SteinFlow.spectral.basis import HermiteBasis
from SteinFlow.targets.mixture import TargetDistribution, make_target

__all__ = ["ExperimentConfig", "parse_config"]

logger = logging.getLogger(__name__)

MIXTURE_KEYS = ("type", "weights", "means", "variances", "offset")
GRID_KEYS = ("lower", "upper", "n")
SECTIONS = ("kernel", "particles", "schedule", "snapshots")
BASIS_KINDS = ("fd", "hermite")
# entries exposed as resolved objects or only as items
RESOLVED_KEYS = ("target", "grid", "initial", "T")
MAX_SEED = 2**64


def _is_int(value) -> bool:
    return isinstance(value, Integral) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def _reject_unknown(data: Dict[str, Any], allowed, path: str = ""):
    for key in data:
        if key not in allowed:
            raise ConfigError(
                f"{path}.{key}" if path else str(key), "unknown key"
            )


class ExperimentConfig(_Args):
    """Validated experiment configuration.

    Sections are available as attributes (``config.kernel["k"]``) and as
    items (``config["T"]``).
    """

    option = "run"
    _arg_names = list(EXPERIMENT_DEFAULTS)
    _arg_defaults = EXPERIMENT_DEFAULTS

    def __init__(self, data: Dict[str, Any]):
        if not isinstance(data, dict):
            raise ConfigError("", "configuration must be a JSON object")
        super().__init__(copy.deepcopy(data))
        self.process()
        self.check()
        self._set_attributes(
            data_keys=[k for k in self._arg_names if k not in RESOLVED_KEYS]
        )

    def process(self):
        """Reject unknown keys and fill in defaults."""
        _reject_unknown(self.data, self._arg_names)
        for key in SECTIONS:
            section = self.data.get(key, {})
            if not isinstance(section, dict):
                raise ConfigError(key, "expected an object")
            _reject_unknown(section, self._arg_defaults[key], key)
            self.data[key] = {**copy.deepcopy(self._arg_defaults[key]), **section}
        for key in self._arg_names:
            if key not in self.data:
                self.data[key] = copy.deepcopy(self._arg_defaults[key])

    def check(self):
        """Validate all entries and resolve method-dependent defaults."""
        self._check_general()
        self._check_target_and_grid()
        self._check_kernel()
        self._check_particles()
        self._check_schedule()
        self._check_flow()

    # general entries

    def _check_general(self):
        data = self.data
        if data["method"] not in METHODS:
            raise ConfigError("method", f"expected one of {list(METHODS)}")
        for key in ("name", "output"):
            if not isinstance(data[key], str) or not data[key]:
                raise ConfigError(key, "expected a non-empty string")
        if not isinstance(data["description"], str):
            raise ConfigError("description", "expected a string")
        if not isinstance(data["progress"], bool):
            raise ConfigError("progress", "expected true or false")
        seed = data["seed"]
        if not _is_int(seed) or not 0 <= seed < MAX_SEED:
            raise ConfigError("seed", "expected an unsigned 64-bit integer")

    # target and grid

    @staticmethod
    def _mixture(spec, path) -> TargetDistribution:
        if not isinstance(spec, dict):
            raise ConfigError(path, "expected a Gaussian mixture object")
        _reject_unknown(spec, MIXTURE_KEYS, path)
        try:
            return make_target(spec)
        except InvalidSpecError as e:
            raise ConfigError(path, str(e)) from None

    def _check_target_and_grid(self):
        self._target = self._mixture(self.data["target"], "target")
        spec = self.data["grid"]
        axes = spec if isinstance(spec, list) else [spec]
        if not axes or len(axes) > 2:
            raise ConfigError("grid", "expected one or two axis objects")
        for i, axis in enumerate(axes):
            path = "grid" if isinstance(spec, dict) else f"grid.{i}"
            if not isinstance(axis, dict):
                raise ConfigError(path, "expected an object")
            _reject_unknown(axis, GRID_KEYS, path)
            for key in GRID_KEYS:
                if key not in axis:
                    raise ConfigError(f"{path}.{key}", "missing entry")
            if not _is_int(axis["n"]):
                raise ConfigError(f"{path}.n", "expected an integer")
        try:
            self._grid = make_grid(spec)
        except InvalidSpecError as e:
            raise ConfigError("grid", str(e)) from None
        if self._grid.dimension != self._target.dimension:
            raise ConfigError(
                "grid",
                f"{self._grid.dimension}D grid for a {self._target.dimension}D target",
            )

    # kernel

    def _check_kernel(self):
        kernel = self.data["kernel"]
        method = self.data["method"]
        if kernel["kind"] is None:
            kernel["kind"] = {"svgd": "rbf", "csf_flow": None}.get(method, "spectral")
        elif kernel["kind"] not in ("rbf", "spectral"):
            raise ConfigError("kernel.kind", "expected 'rbf' or 'spectral'")
        if method in ("lawgd", "lawgd_flow") and kernel["kind"] != "spectral":
            raise ConfigError("kernel.kind", f"{method} requires a spectral kernel")
        if kernel["kind"] == "spectral":
            self._check_basis(kernel, method)
        elif kernel["basis"] is not None or kernel["k"] is not None:
            raise ConfigError("kernel.basis", "only spectral kernels have a basis")
        bandwidth = kernel["bandwidth"]
        if bandwidth is not None and not (_is_number(bandwidth) and bandwidth > 0):
            raise ConfigError("kernel.bandwidth", "expected a positive number")
        if not _is_int(kernel["bandwidth_every"]) or kernel["bandwidth_every"] < 1:
            raise ConfigError("kernel.bandwidth_every", "expected an integer >= 1")
        cache = kernel["basis_cache"]
        if cache is not None and not (isinstance(cache, str) and cache):
            raise ConfigError("kernel.basis_cache", "expected a directory path")

    def _check_basis(self, kernel, method):
        gaussian_1d = self._target.is_standard_gaussian and self._target.dimension == 1
        if kernel["basis"] is None:
            kernel["basis"] = (
                "hermite" if gaussian_1d and method != "lawgd_flow" else "fd"
            )
        if kernel["basis"] not in BASIS_KINDS:
            raise ConfigError("kernel.basis", f"expected one of {list(BASIS_KINDS)}")
        if kernel["basis"] == "hermite":
            if not gaussian_1d:
                raise ConfigError(
                    "kernel.basis",
                    "Hermite bases need the 1D standard Gaussian target",
                )
            if method == "lawgd_flow":
                raise ConfigError(
                    "kernel.basis", "density flows need a finite-difference basis"
                )
            if kernel["k"] is None:
                kernel["k"] = DEFAULT_HERMITE_MODES
        k = kernel["k"]
        if k is not None:
            if not _is_int(k) or k < 1:
                raise ConfigError("kernel.k", "expected an integer >= 1")
            if kernel["basis"] == "hermite":
                try:
                    HermiteBasis(k)
                except InvalidSpecError as e:
                    raise ConfigError("kernel.k", str(e)) from None

    # particle methods

    def _check_particles(self):
        particles = self.data["particles"]
        n = particles["n"]
        if not _is_int(n) or n < 1:
            raise ConfigError("particles.n", "expected an integer >= 1")
        kernel = self.data["kernel"]
        if (
            self.data["method"] == "svgd"
            and kernel["kind"] == "rbf"
            and kernel["bandwidth"] is None
            and n < 2
        ):
            raise ConfigError(
                "particles.n", "median bandwidths need at least 2 particles"
            )
        d = self._target.dimension
        corners = {}
        for key in ("lower", "upper"):
            value = particles[key]
            values = value if isinstance(value, list) else [value] * d
            if len(values) != d or not all(_is_number(v) for v in values):
                raise ConfigError(
                    f"particles.{key}", f"expected a number or {d} numbers"
                )
            corners[key] = values
        if any(lo >= hi for lo, hi in zip(corners["lower"], corners["upper"])):
            raise ConfigError("particles.lower", "must be below particles.upper")
        n_iters = self.data["n_iters"]
        if not _is_int(n_iters) or n_iters < 0:
            raise ConfigError("n_iters", "expected an integer >= 0")
        snapshots = self.data["snapshots"]
        every = snapshots["every"]
        if every is not None and (not _is_int(every) or every < 1):
            raise ConfigError("snapshots.every", "expected an integer >= 1")
        at = snapshots["at"]
        if not isinstance(at, list) or not all(_is_int(i) and i >= 0 for i in at):
            raise ConfigError("snapshots.at", "expected a list of integers >= 0")

    def _check_schedule(self):
        schedule = self.data["schedule"]
        if schedule["kind"] not in ("constant", "decay"):
            raise ConfigError("schedule.kind", "expected 'constant' or 'decay'")
        if not _is_number(schedule["h0"]) or not schedule["h0"] > 0:
            raise ConfigError("schedule.h0", "step size must be positive")
        if not _is_number(schedule["gamma"]) or not 0 <= schedule["gamma"] <= 1:
            raise ConfigError("schedule.gamma", "expected a number in [0, 1]")
        if not _is_int(schedule["warmup"]) or schedule["warmup"] < 0:
            raise ConfigError("schedule.warmup", "expected an integer >= 0")

    # density flows

    def _check_flow(self):
        data = self.data
        for key in ("T", "dt"):
            if not _is_number(data[key]) or not data[key] > 0:
                raise ConfigError(key, "expected a positive number")
        record_every = data["record_every"]
        if record_every is not None and not (
            _is_number(record_every) and record_every > 0
        ):
            raise ConfigError("record_every", "expected a positive number")
        self._initial = None
        if data["method"] not in FLOW_METHODS:
            return
        if self._grid.dimension != 1:
            raise ConfigError("grid", "density flows need a 1D grid")
        if data["initial"] is None:
            raise ConfigError("initial", "density flows need an initial density")
        self._initial = self._mixture(data["initial"], "initial")
        if self._initial.dimension != 1:
            raise ConfigError("initial", "expected a 1D Gaussian mixture")

    # resolved values

    @property
    def target(self) -> TargetDistribution:
        return self._target

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def initial(self) -> Optional[TargetDistribution]:
        return self._initial

    @property
    def is_flow(self) -> bool:
        return self.data["method"] in FLOW_METHODS

    @property
    def is_particle_method(self) -> bool:
        return self.data["method"] in PARTICLE_METHODS

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.data)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def override(self, **entries) -> ExperimentConfig:
        """Validated copy with top-level entries replaced (None values are
        ignored)."""
        data = self.to_dict()
        data.update({k: v for k, v in entries.items() if v is not None})
        return self.__class__(data)


@get_file_or_str
def _read_source(data: Any) -> Any:
    return data


def parse_config(source: Any) -> ExperimentConfig:
    """Experiment configuration from a JSON/YAML file, document string or
    dictionary.
    :raises ConfigError: on unreadable documents and on the first invalid
        entry"""
    try:
        data = _read_source(source)
    except (ValueError, yaml.YAMLError) as e:
        raise ConfigError("", f"cannot parse configuration: {e}") from None
    return ExperimentConfig(data)
