#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.experiment.presets` --- Built-in experiment presets
======================================================================

Preset configurations are JSON files in ``SteinFlow/data/presets``; names
are matched case-insensitively.
"""
from __future__ import annotations

import json
from typing import Any, Dict, List

from caseless_dictionary import CaselessDict

from SteinFlow.core.consts import PRESETS

__all__ = ["preset_names", "load_preset", "list_presets"]


def _preset_files() -> CaselessDict:
    return CaselessDict(
        {
            resource.name.removesuffix(".json"): resource
            for resource in PRESETS.iterdir()
            if resource.name.endswith(".json")
        }
    )


def preset_names() -> List[str]:
    return sorted(_preset_files())


def load_preset(name: str) -> Dict[str, Any]:
    """Raw configuration dictionary of the preset `name`."""
    files = _preset_files()
    try:
        resource = files[name]
    except KeyError:
        raise KeyError(
            f"Unknown preset {name!r}, available: {', '.join(sorted(files))}"
        ) from None
    return json.loads(resource.read_text(encoding="UTF-8"))


def list_presets() -> Dict[str, str]:
    """Preset names with their descriptions."""
    return {name: load_preset(name).get("description", "") for name in preset_names()}
