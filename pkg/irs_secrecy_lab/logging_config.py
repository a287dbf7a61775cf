"""Package logger: warnings on the console, the history of each run next to its results."""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Literal

LOGGER_NAME = "irs_secrecy_lab"
RUN_LOG_NAME = "irs-secrecy-lab.log"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class RunLogHandler(logging.FileHandler):
    """File handler bound to one output directory."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        super().__init__(self.out_dir / RUN_LOG_NAME, mode="a", encoding="utf-8")


def _detailed(handler: logging.Handler) -> logging.Handler:
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(FILE_FORMAT))
    return handler


def _drop_handlers(logger: logging.Logger, kind: type[logging.Handler] = logging.Handler) -> None:
    for handler in list(logger.handlers):
        if isinstance(handler, kind):
            logger.removeHandler(handler)
            handler.close()


def setup_logging(
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO",
    log_file: str | None = None,
) -> logging.Logger:
    """
    Set up the package logger.

    Args:
        level: Level of the package logger; run logs record everything at or above it
        log_file: Optional extra file receiving the same records

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(getattr(logging, level))
    _drop_handlers(logger)

    # Console only carries warnings
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.WARNING)
    console_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(console_handler)

    if log_file:
        logger.addHandler(_detailed(logging.FileHandler(log_file, encoding="utf-8")))
    return logger


def attach_run_log(out_dir: Path) -> Path:
    """
    Append the package log to ``<out_dir>/irs-secrecy-lab.log`` from now on.

    A run log attached earlier in the same process is closed first, so each output
    directory only collects the runs written there.
    """
    logger = logging.getLogger(LOGGER_NAME)
    _drop_handlers(logger, RunLogHandler)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    handler = RunLogHandler(out_dir)
    logger.addHandler(_detailed(handler))
    return handler.out_dir / RUN_LOG_NAME


def detach_run_log() -> None:
    _drop_handlers(logging.getLogger(LOGGER_NAME), RunLogHandler)


logger = setup_logging()
