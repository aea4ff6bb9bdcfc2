#!/usr/bin/env python3
# -*- coding: UTF-8 -*-
from __future__ import annotations

import logging

from SteinFlow.core.log import SteinFlowLogger

logging.setLoggerClass(SteinFlowLogger)


__all__ = ["SteinFlowLogger"]
