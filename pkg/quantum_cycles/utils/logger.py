"""Centralized logging configuration for the lab."""

import logging
import os
import sys

_TRUTHY = ("true", "1", "yes")


def is_debug_enabled() -> bool:
    """Check if debug logging is enabled via the DEBUG_LOGGING environment variable."""
    return os.getenv("DEBUG_LOGGING", "").lower() in _TRUTHY


def get_debug_logger(name: str) -> logging.Logger:
    """Get a stderr logger that respects the DEBUG_LOGGING environment variable.

    Args:
        name: The name of the logger (typically __name__)

    Returns:
        A configured logger instance; DEBUG when enabled, WARNING otherwise
    """
    logger = logging.getLogger(name)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.propagate = False

    logger.setLevel(logging.DEBUG if is_debug_enabled() else logging.WARNING)
    return logger
