import logging
import os
import sys

import structlog
from dotenv import load_dotenv

load_dotenv()

DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_FORMAT = "console"
DEFAULT_THREADS = 1
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def get_log_level() -> str:
    """Returns the configured log level name."""
    level = os.getenv("RB_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
    return level if level in LOG_LEVELS else DEFAULT_LOG_LEVEL


def get_log_format() -> str:
    """Returns 'console' or 'json'."""
    fmt = os.getenv("RB_LOG_FORMAT", DEFAULT_LOG_FORMAT).lower()
    return fmt if fmt in ("console", "json") else DEFAULT_LOG_FORMAT


def get_default_threads() -> int:
    """Returns the worker count used when --threads is not given."""
    try:
        return max(1, int(os.getenv("RB_THREADS", DEFAULT_THREADS)))
    except ValueError:
        return DEFAULT_THREADS


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """
    Route stdlib logging through a structlog formatter.

    Modules keep using ``logging.getLogger(__name__)``; only the rendering
    changes with ``fmt``.

    Args:
        level: Log level name (defaults to RB_LOG_LEVEL)
        fmt: 'console' or 'json' (defaults to RB_LOG_FORMAT)
    """
    level = (level or get_log_level()).upper()
    fmt = fmt or get_log_format()

    renderer = (
        structlog.processors.JSONRenderer()
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    formatter = structlog.stdlib.ProcessorFormatter(
        processor=renderer,
        foreign_pre_chain=[
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
        ],
    )

    # Logs go to stderr; stdout is reserved for command results.
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(level)
