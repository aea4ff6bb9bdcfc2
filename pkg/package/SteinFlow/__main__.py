#!/usr/bin/env python3
from __future__ import annotations

import logging
import sys

from SteinFlow import ArgsFactory, SteinFlowLogger, parser
from SteinFlow.core.errors import InvalidSpecError, NumericError

__all__ = ["run"]


logging.setLoggerClass(SteinFlowLogger)

logger: SteinFlowLogger = logging.getLogger(__name__)

# exit codes
EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3


def run(argv=None):
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    args_factory = ArgsFactory()
    try:
        args = args_factory.init_subclass(args)
        if args.debug_run:
            logging.getLogger("SteinFlow").setLevel(logging.DEBUG)
        args.process()
    except InvalidSpecError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except KeyError as e:
        logger.error(f"Configuration error: {e.args[0]}")
        return EXIT_CONFIG_ERROR
    except NumericError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERIC_ERROR
    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(run())
