#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.core.consts` --- Constants
=============================================
"""
import os
from datetime import datetime, timezone

from importlib_resources import files

__all__ = [
    "exec_time",
    "exec_date",
    "exec_datetime",
    "LINE_LENGTH",
    "TABSIZE",
    "DATA",
    "PRESETS",
    "DENSITY_FLOOR",
    "ZERO_EIGENVALUE_TOL",
    "MAX_HERMITE_MODES",
    "DENSE_EIGEN_MAX_NODES",
    "GUARD_FACTOR",
    "THREADS",
    "CSV_FLOAT_FORMAT",
]

DATA = files("SteinFlow.data")
PRESETS = DATA.joinpath("presets")

exec_datetime = datetime.now(timezone.utc).strftime("%y%m%d%H%M")
exec_date = datetime.now(timezone.utc).strftime("%y/%m/%d")
exec_time = datetime.now(timezone.utc).strftime("%H:%M")

LINE_LENGTH: int = 100
TABSIZE = 4

# floor applied to target densities before division
DENSITY_FLOOR: float = 1e-300
# eigenvalues at or below this are treated as zero modes
ZERO_EIGENVALUE_TOL: float = 1e-8
MAX_HERMITE_MODES: int = 200
DENSE_EIGEN_MAX_NODES: int = 4096
# particles further than GUARD_FACTOR grid half-widths from the centre abort a run
GUARD_FACTOR: float = 10.0

THREADS = os.environ.get("STEINFLOW_THREADS", None)

CSV_FLOAT_FORMAT = "%.12e"
