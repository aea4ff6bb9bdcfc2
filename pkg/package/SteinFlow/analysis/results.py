#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.analysis.results` --- Result containers
==========================================================
"""
from __future__ import annotations

from collections import UserDict

__all__ = ["Results"]


class Results(UserDict):
    """Dictionary whose string keys double as attributes, so that reports
    read as ``report.kl`` or ``report["kl"]``.

    Keys that shadow a dictionary method, and string keys that are not
    identifiers, are rejected."""

    def __init__(self, *args, **kwargs):
        self.__dict__["data"] = {}
        self.update(dict(*args, **kwargs))

    def __setitem__(self, key, item):
        if key == "data" or key in dir(self):
            raise AttributeError(f"{key!r} is a protected dictionary attribute")
        if isinstance(key, str) and not key.isidentifier():
            raise ValueError(f"{key!r} is not a valid attribute name")
        super().__setitem__(key, item)

    def __setattr__(self, attr, val):
        self.__setitem__(attr, val)

    def __getattr__(self, attr):
        try:
            return self[attr]
        except KeyError as err:
            raise AttributeError(
                f"{self.__class__.__name__!r} object has no attribute {attr!r}"
            ) from err
