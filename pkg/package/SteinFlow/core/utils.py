#!/usr/bin/env python3
# -*- coding: utf-8 -*-
r""":mod:`SteinFlow.core.utils` --- Utility functions
====================================================
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
import shutil
from functools import partial, wraps
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from SteinFlow.core.consts import LINE_LENGTH

__all__ = [
    "get_header",
    "get_subheader",
    "get_debugheader",
    "backup_files",
    "get_file_or_str",
    "parse_yaml",
    "read_config_source",
    "canonical_json",
    "fingerprint",
]

logger = logging.getLogger(__name__)

line_length = LINE_LENGTH


def _get_header(
    header_str: str, fill: str, n_linechars: int = line_length
) -> str:
    """Get header for printing formatted log headers.
    :param header_str: header string
    :param fill: fill character
    :param n_linechars: number of characters per line
    :return: header string"""
    return (
        f"\n{fill:{fill}>{n_linechars}}\n"
        f"{header_str:^{n_linechars}}\n"
        f"{fill:{fill}>{n_linechars}}\n"
    )


def _get_info_box(header_str, fill, n_linechars=line_length, n_fillchars=0):
    """Get info box for printing formatted log headers.
    :param header_str: header string
    :param fill: fill character
    :param n_linechars: number of characters per line
    :param n_fillchars: number of fill characters
    :return: info box string"""
    fill_len = n_fillchars // 2
    n_linechars -= 2 * fill_len
    return (
        f"\n{' ':{' '}>{fill_len}}{fill:{fill}>{n_linechars}}\n"
        f"{' ':{' '}>{fill_len}}|{header_str:^{n_linechars-2}}|\n"
        f"{' ':{' '}>{fill_len}}{fill:{fill}>{n_linechars}}\n"
    )


get_header = partial(_get_header, fill="=")

get_subheader = partial(_get_header, fill="-")

get_debugheader = partial(_get_info_box, fill="+")
get_debugheader = partial(get_debugheader, n_fillchars=50)


def backup_files(
    new_filename: Union[str, Path],
    old_filename: Optional[Union[str, Path]] = None,
) -> str:
    """Move existing `new_filename` to numbered backups (``.1``, ``.2``, ...).
    :param new_filename: file name to free
    :param old_filename: file to copy to `new_filename` afterwards
    :return: backup string for log"""
    new_filename = Path(new_filename)
    already_exists = list(new_filename.parent.glob(f"{new_filename.name}"))
    already_exists.extend(
        list(new_filename.parent.glob(f"{new_filename.name}.*"))
    )
    backup_str = ""
    if already_exists:
        suffices = [f.suffix.strip(".") for f in already_exists]
        suffices = [
            int(suffix) for suffix in suffices if re.fullmatch(r"[0-9]+", suffix)
        ]
        backup_str = f"Backing up old {new_filename.name!r}."
        for suffix in sorted(suffices, reverse=True):
            shutil.move(
                f"{new_filename}.{suffix}",
                f"{new_filename}.{suffix + 1}",
                copy_function=shutil.copy2,
            )
        if new_filename.exists():
            shutil.copy2(new_filename, f"{new_filename}.1")
    if old_filename:
        shutil.copy2(old_filename, new_filename)
    return backup_str


def parse_yaml(source) -> Any:
    """Parse yaml file or string.
    :param source: yaml file or string
    :return: parsed data
    """
    return yaml.safe_load(source)


def get_file_or_str(f):
    """Pass the parsed contents of a JSON/YAML file, or of a JSON/YAML
    string, to `f`."""

    @wraps(f)
    def wrapper(file_or_str, *args, **kwargs):
        read_dict = {
            ".yaml": yaml.safe_load,
            ".yml": yaml.safe_load,
            ".json": json.load,
        }
        if isinstance(file_or_str, Path) or (
            isinstance(file_or_str, str)
            and "\n" not in file_or_str
            and Path(file_or_str).suffix in read_dict
            and Path(file_or_str).is_file()
        ):
            file = Path(file_or_str)
            with open(file, "r", encoding="UTF-8") as read_file:
                if file.suffix in read_dict:
                    data = read_dict[file.suffix](read_file)
                else:
                    data = read_config_source(read_file.read())
        elif isinstance(file_or_str, str):
            data = read_config_source(file_or_str)
        else:
            data = file_or_str
        return f(data, *args, **kwargs)

    return wrapper


def read_config_source(text: str) -> Any:
    """Parse a JSON document, falling back to YAML.
    :param text: document text
    :return: parsed data"""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return yaml.safe_load(text)


def canonical_json(data: Any) -> str:
    """Key-sorted, whitespace-free JSON representation."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def fingerprint(data: Any) -> str:
    """SHA-256 hex digest of the canonical JSON of `data`."""
    return hashlib.sha256(canonical_json(data).encode("UTF-8")).hexdigest()
