"""
Structured logging helpers

Modules log through ``get_logger(__name__)`` with ``extra={...}`` context, as
plain stdlib loggers. The package handler renders each record through a
structlog ``ProcessorFormatter``: the ``extra`` context becomes event-dict
keys, written as console key=value lines or as one JSON object per line.
"""

import logging
import sys
from typing import Any

import structlog

_ROOT = "thermoporo"

# Applied to every stdlib record before rendering
_PRE_CHAIN: list[Any] = [
    structlog.stdlib.add_log_level,
    structlog.stdlib.add_logger_name,
    structlog.stdlib.ExtraAdder(),
]


def _render_chain(fmt: str) -> list[Any]:
    if fmt == "json":
        return [
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True, default=str),
        ]
    return [
        structlog.stdlib.ProcessorFormatter.remove_processors_meta,
        structlog.dev.ConsoleRenderer(colors=False),
    ]


def get_logger(name: str) -> logging.Logger:
    """Return a logger below the package root so one handler serves all modules."""
    if name != _ROOT and not name.startswith(_ROOT + "."):
        name = f"{_ROOT}.{name}"
    return logging.getLogger(name)


def configure_logging(level: str = "INFO", fmt: str = "text") -> None:
    """
    Install a single stderr handler on the package logger.

    Calling it again replaces the previous handler, so the CLI and tests can
    reconfigure freely.

    Args:
        level: Standard logging level name
        fmt: ``text`` for console key=value lines, ``json`` for JSON lines
    """
    root = logging.getLogger(_ROOT)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        structlog.stdlib.ProcessorFormatter(
            foreign_pre_chain=_PRE_CHAIN,
            processors=_render_chain(fmt),
        )
    )
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False
