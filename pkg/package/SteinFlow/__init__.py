#!/usr/bin/env python3
from __future__ import annotations

import logging
from importlib.metadata import PackageNotFoundError, version

from SteinFlow.core.log import SteinFlowLogger

logging.setLoggerClass(SteinFlowLogger)

from SteinFlow.core.errors import (
    ConfigError,
    DomainError,
    InvalidSpecError,
    NumericAbort,
    NumericError,
    SteinFlowError,
)
from SteinFlow.core.parsing import ArgsFactory, parser
from SteinFlow.core.sftypes import FloatArray, PathOrStr, PointsLike

try:
    __version__ = version("SteinFlow")
except PackageNotFoundError:
    __version__ = "unknown"

__all__ = [
    "SteinFlowLogger",
    "SteinFlowError",
    "InvalidSpecError",
    "ConfigError",
    "DomainError",
    "NumericError",
    "NumericAbort",
    "FloatArray",
    "PathOrStr",
    "PointsLike",
    "ArgsFactory",
    "parser",
    "__version__",
]
