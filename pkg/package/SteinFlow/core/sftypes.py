#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.core.sftypes` --- Type aliases
=================================================
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, TypeVar, Union

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "FloatArray",
    "PointLike",
    "PointsLike",
    "PathOrStr",
    "AnyDict",
    "Series",
    "StrNum",
]

FloatArray = NDArray[np.float64]

# single point: scalar (1D) or length-d sequence
PointLike = Union[float, Sequence[float], FloatArray]
# batch of points, shape (N,) in 1D or (N, d)
PointsLike = Union[Sequence[float], Sequence[Sequence[float]], FloatArray]

PathOrStr = Union[Path, str]
AnyDict = TypeVar("AnyDict", Dict[str, Any], dict)
StrNum = Union[str, float, int]

# (t, value) pairs
Series = Union[Sequence[Tuple[float, float]], List[Tuple[float, float]]]
