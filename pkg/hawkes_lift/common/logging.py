"""
Logging configuration for the hawkes_lift toolkit

Library modules only call ``get_logger(__name__)``; the CLI calls
``configure_logging`` once. Records go to stderr because ``check`` prints its
report on stdout.
"""

import logging
import sys
from typing import Optional

DEFAULT_LOGGER_NAME = "hawkes_lift"

_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
# Seeds run on a thread pool; at debug level the worker matters.
_DEBUG_FORMAT = "%(asctime)s - %(name)s [%(threadName)s] - %(levelname)s - %(message)s"

_QUIET_LOGGERS = ("matplotlib", "numexpr", "PIL")


def configure_logging(debug: bool = False, name: str = DEFAULT_LOGGER_NAME) -> logging.Logger:
    """Configure logging for a CLI run.

    Args:
        debug: Enable debug logging (per-seed and per-sweep detail)
        name: Logger name

    Returns:
        logging.Logger: Configured package logger
    """
    log_level = logging.DEBUG if debug else logging.INFO

    logging.basicConfig(
        level=log_level,
        format=_DEBUG_FORMAT if debug else _FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
    # scipy IntegrationWarning and numpy RuntimeWarning end up in the same stream
    logging.captureWarnings(True)

    for noisy in _QUIET_LOGGERS:
        logging.getLogger(noisy).setLevel(logging.WARNING)

    logger = logging.getLogger(name)
    logger.setLevel(log_level)
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Logger under the package namespace; defaults to ``hawkes_lift``."""
    return logging.getLogger(name or DEFAULT_LOGGER_NAME)
