"""Centralized logging configuration."""

import logging
import sys
from typing import Optional, Union

from heisenflow.utils.config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Configure root logger. Output files are written elsewhere, so log lines go to stderr.
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format=LOG_FORMAT,
    handlers=[logging.StreamHandler(sys.stderr)],
)

_level_override: Optional[int] = None


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for the given name.

    This is the recommended way to get loggers.
    """
    logger = logging.getLogger(name)
    logger.setLevel(_level_override if _level_override is not None else settings.LOG_LEVEL)
    return logger


def configure_logging(level: Union[int, str]) -> None:
    """Change the level of every heisenflow logger at once.

    Used by the command line to honour ``--verbose`` and ``--quiet``.

    Args:
        level: A ``logging`` level number or name
    """
    global _level_override

    resolved = logging.getLevelName(level) if isinstance(level, str) else level
    if not isinstance(resolved, int):
        raise ValueError(f"Unknown log level: {level}")

    _level_override = resolved
    logging.getLogger().setLevel(resolved)
    for name in list(logging.root.manager.loggerDict):
        if name.startswith("heisenflow"):
            logging.getLogger(name).setLevel(resolved)
