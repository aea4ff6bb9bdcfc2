#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.core.errors` --- Exceptions
==============================================

All package exceptions derive from :class:`SteinFlowError` and from the
builtin exception type that describes the failure.
"""
from __future__ import annotations

from typing import Optional, Sequence, Union

__all__ = [
    "SteinFlowError",
    "InvalidSpecError",
    "ConfigError",
    "DomainError",
    "NumericError",
    "SolverError",
    "EmptyBasisError",
    "InstabilityError",
    "NumericAbort",
    "InsufficientDataError",
]


class SteinFlowError(Exception):
    """Base class for SteinFlow errors."""


class InvalidSpecError(SteinFlowError, ValueError):
    """Invalid target, grid, kernel or schedule specification."""


class ConfigError(InvalidSpecError):
    """Invalid experiment configuration entry.

    :param path: dotted JSON path of the offending entry
    :param message: description of the problem
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class DomainError(SteinFlowError, ValueError):
    """Point or probability outside the admissible domain."""

    def __init__(
        self,
        message: str,
        coordinate: Optional[Union[float, Sequence[float]]] = None,
    ):
        self.coordinate = coordinate
        super().__init__(message)


class NumericError(SteinFlowError, ArithmeticError):
    """Non-finite or degenerate numerical values."""


class SolverError(NumericError):
    """Eigensolver failure.

    :param residual: largest residual norm of the returned eigenpairs
    """

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class EmptyBasisError(NumericError):
    """No eigenmode left after filtering."""


class InstabilityError(NumericError):
    """Density flow step produced negative mass or failed to advance."""


class NumericAbort(NumericError):
    """Particle run aborted by the overflow or divergence guard."""

    def __init__(self, message: str, particle: int, iteration: int):
        self.particle = particle
        self.iteration = iteration
        super().__init__(
            f"{message} (particle {particle}, iteration {iteration})"
        )


class InsufficientDataError(SteinFlowError, ValueError):
    """Too few usable points for a fit."""
