#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.core.parsing` --- Argument parsing module"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from argparse import ArgumentParser
from collections import UserDict
from pathlib import Path
from typing import Any, Dict, List

from SteinFlow.core.errors import ConfigError
from SteinFlow.core.utils import get_debugheader

__all__ = [
    "ArgsFactory",
    "parser",
    "RunArgs",
    "PresetsArgs",
    "BasisArgs",
]

logger = logging.getLogger(__name__)

parser: ArgumentParser = ArgumentParser(
    "steinflow",
    description="Run SVGD/LAWGD particle samplers and density flows.",
    add_help=True,
    allow_abbrev=False,
)

parser.add_argument(
    "--debug",
    help="Debug run",
    action="store_true",
    default=False,
    dest="DEBUG",
)

subparsers = parser.add_subparsers(help="Select option.", dest="option")
subparsers.required = True

# Experiment run parser
runparser = subparsers.add_parser("run", help="Run an experiment.")

runparser.add_argument(
    "config",
    help="JSON file with experiment parameters or name of a built-in preset",
    metavar="config",
)

runparser.add_argument(
    "--out",
    help="Output directory (overrides the configured one).",
    dest="out",
    default=None,
    required=False,
)

runparser.add_argument(
    "--seed",
    help="Unsigned 64-bit seed (overrides the configured one).",
    type=int,
    dest="seed",
    default=None,
    required=False,
)

# Preset listing parser
presetparser = subparsers.add_parser("presets", help="List built-in presets.")

# Basis cache parser
basisparser = subparsers.add_parser("basis", help="Manage the eigenbasis cache.")
basis_subparsers = basisparser.add_subparsers(dest="basis_option")
basis_subparsers.required = True
basisbuildparser = basis_subparsers.add_parser(
    "build", help="Compute and cache the eigenbasis of an experiment."
)
basisbuildparser.add_argument(
    "config",
    help="JSON file with experiment parameters or name of a built-in preset",
    metavar="config",
)


class _Args(ABC, UserDict):
    option = None
    _arg_defaults = {}
    _arg_names = []

    def __init__(self, data: dict):
        self.data = data

    def __repr__(self):
        return f"{self.__class__.__name__}({self.data.__repr__()})"

    def __str__(self):
        return f"{self.__class__.__name__}({self.data.__str__()})"

    @abstractmethod
    def process(self):
        pass

    @abstractmethod
    def check(self):
        pass

    def _set_attributes(self, data_keys: List[str], optional: List[str] = []):
        for prm in data_keys:
            try:
                prm_value = self.data[prm]
            except KeyError:
                try:
                    prm_value = self._arg_defaults[prm]
                except KeyError:
                    if prm in optional:
                        prm_value = None
                    else:
                        raise KeyError(f"Missing required parameter {prm!r}")
            setattr(self, prm.lower(), prm_value)


def _load_config(source: str):
    """Experiment configuration from a file path or preset name."""
    from SteinFlow.experiment.config import parse_config
    from SteinFlow.experiment.presets import load_preset, preset_names

    if Path(source).is_file():
        return parse_config(Path(source))
    if source.lower() in (name.lower() for name in preset_names()):
        logger.finfo(f"Using built-in preset {source!r}")
        return parse_config(load_preset(source))
    raise ConfigError("", f"No configuration file or preset named {source!r}")


class RunArgs(_Args):
    """``steinflow run``"""

    option = "run"
    _arg_names = ["config", "out", "seed"]
    _arg_defaults = {"out": None, "seed": None}

    def __init__(self, data: Dict[str, Any], debug_run: bool = False):
        super().__init__(data)
        self.debug_run = debug_run
        self.check()
        self._set_attributes(self._arg_names)

    def check(self):
        if not isinstance(self.data.get("config"), str):
            raise KeyError("Missing required parameter 'config'")

    def process(self):
        """Load the configuration and run the experiment."""
        from SteinFlow.experiment.runner import run_experiment

        config = _load_config(self.config)
        config = config.override(output=self.out, seed=self.seed)
        return run_experiment(config)


class PresetsArgs(_Args):
    """``steinflow presets``"""

    option = "presets"

    def __init__(self, data: Dict[str, Any], debug_run: bool = False):
        super().__init__(data)
        self.debug_run = debug_run

    def check(self):
        pass

    def process(self):
        from SteinFlow.experiment.presets import list_presets

        presets = list_presets()
        width = max(map(len, presets), default=0)
        for name, description in presets.items():
            logger.finfo(description, kwd_str=f"{name:<{width}}  ")
        return presets


class BasisArgs(_Args):
    """``steinflow basis build``"""

    option = "basis"
    _arg_names = ["config", "basis_option"]

    def __init__(self, data: Dict[str, Any], debug_run: bool = False):
        super().__init__(data)
        self.debug_run = debug_run
        self.check()
        self._set_attributes(self._arg_names)

    def check(self):
        if self.data.get("basis_option") != "build":
            raise KeyError(f"Unknown basis option {self.data.get('basis_option')!r}")

    def process(self):
        from SteinFlow.experiment.runner import warm_basis_cache

        return warm_basis_cache(_load_config(self.config))


class ArgsFactory:
    """Factory class for initialising parser argument classes."""

    _options = {
        "run": RunArgs,
        "presets": PresetsArgs,
        "basis": BasisArgs,
    }

    @classmethod
    def init_subclass(cls, parse_args):
        """Initialise parser argument class based on command line arguments.
        :param parse_args: command line arguments
        :param type: Dict[str, Any]
        :return: parser argument class
        :return type: _Args subclass"""
        if type(parse_args) != dict:
            data = dict(parse_args.__dict__)
        else:
            data = dict(parse_args)
        option = data.pop("option")
        debug_run = data.pop("DEBUG", False)
        if debug_run:
            logger.info(get_debugheader("DEBUG RUN"))
        try:
            _cls = cls._options[option]
        except KeyError:
            raise KeyError(f"{option!r} is not known!")
        return _cls(data, debug_run=debug_run)
