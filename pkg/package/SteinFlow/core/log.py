#!/usr/bin/env python3
r""":mod:`SteinFlow.core.log` --- Package logger
==============================================
"""
from __future__ import annotations

import logging
import textwrap
from pathlib import Path
from typing import Optional, Union

from SteinFlow.core.consts import LINE_LENGTH, TABSIZE, exec_date, exec_time

__all__ = ["SteinFlowLogger"]


class SteinFlowLogger(logging.Logger):
    logging.basicConfig(format="%(message)s", level=logging.INFO, force=False)
    logging.captureWarnings(True)
    _name = __package__.split(".")[0]
    _logfilename: Optional[Path] = None

    def __init__(self, name, level=logging.INFO):
        super().__init__(name, level=level)
        self.logfilename = self.__class__._logfilename
        if self.logfilename is not None:
            self._add_file_handler(self.logfilename, level)

    def _add_file_handler(self, filename: Path, level=logging.INFO):
        file_handler = logging.FileHandler(filename, "a", encoding="UTF-8")
        file_handler.setLevel(level=level)
        self.addHandler(file_handler)
        return file_handler

    def _package_loggers(self):
        """Package root logger followed by all initialised child loggers."""
        manager = self.manager
        root_logger = logging.getLogger(self._name)
        children = [
            instance
            for name, instance in manager.loggerDict.items()
            if name.startswith(f"{self._name}.")
            and isinstance(instance, logging.Logger)
        ]
        return [root_logger, *children]

    def set_file_name(
        self,
        new_filepath: Union[str, Path],
        new_filename: Optional[str] = None,
    ) -> Path:
        """Write the log of all package loggers to a file in `new_filepath`.
        Existing log files of the same name are backed up.
        :param new_filepath: directory of the log file
        :param new_filename: log file stem, defaults to the package name
        :return: log file path"""
        from SteinFlow.core.utils import backup_files

        if new_filename is None:
            new_filename = self._name
        new_file = (Path(new_filepath) / new_filename).with_suffix(".log")
        new_file.parent.mkdir(parents=True, exist_ok=True)
        if new_file.is_file():
            backup_str = backup_files(new_file)
            new_file.write_text("")
            if backup_str:
                self.info(backup_str)
        for instance in self._package_loggers():
            if not hasattr(instance, "logfilename"):
                continue
            for handler in list(instance.handlers):
                if isinstance(handler, logging.FileHandler):
                    handler.close()
                    instance.removeHandler(handler)
            instance.logfilename = new_file
            if isinstance(instance, SteinFlowLogger):
                instance._add_file_handler(new_file, instance.level)
        self.__class__._logfilename = new_file
        logging.getLogger(self._name).info(
            f"{self._name} - {exec_date} - {exec_time}"
        )
        return new_file

    def close_file(self):
        """Detach file handlers from all package loggers."""
        for instance in self._package_loggers():
            for handler in list(instance.handlers):
                if isinstance(handler, logging.FileHandler):
                    handler.close()
                    instance.removeHandler(handler)
            instance.logfilename = None
        self.__class__._logfilename = None

    def finfo(
        self,
        message,
        line_width=LINE_LENGTH,
        kwd_str="",
        indent="",
        fix_sentence_endings=True,
        initial_linebreak=False,
        expand_tabs=False,
        replace_whitespace=False,
    ):
        if initial_linebreak:
            initial_chars = "\n"
        else:
            initial_chars = ""
        message_str = textwrap.fill(
            f"{kwd_str.expandtabs(TABSIZE)}{message.expandtabs(TABSIZE)}",
            initial_indent=indent,
            width=line_width,
            fix_sentence_endings=fix_sentence_endings,
            replace_whitespace=replace_whitespace,
            expand_tabs=expand_tabs,
            break_on_hyphens=False,
            break_long_words=False,
            subsequent_indent=" " * len(kwd_str) + indent,
            tabsize=TABSIZE,
            drop_whitespace=False,
        )
        self.info(f"{initial_chars}{message_str}")


logging.setLoggerClass(SteinFlowLogger)
