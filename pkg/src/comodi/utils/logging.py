"""Logging utilities for COMODI.

The main log rotates under ``<home>/logs``; each project run gets its own
plain log under ``<home>/logs/runs`` so a run can be inspected on its own.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from types import TracebackType
from typing import Optional, Union

from comodi.utils.constants import (
    LOG_DATE_FORMAT,
    LOG_FILE_BACKUP_COUNT,
    LOG_FILE_MAX_BYTES,
    LOGS_SUBDIR,
    MAIN_LOG_FILE,
    RUN_LOGS_SUBDIR,
    SEPARATOR_WIDTH,
    get_base_dir,
)

ROOT_LOGGER = "comodi"


def _formatter(with_logger_name: bool) -> logging.Formatter:
    fields = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    if not with_logger_name:
        fields = "%(asctime)s - %(levelname)s - %(message)s"
    return logging.Formatter(fields, datefmt=LOG_DATE_FORMAT)


def resolve_level(level: Union[int, str]) -> int:
    """Numeric level for a level or a level name; unknown names fall back to INFO."""
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(level.strip().upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logging(
    base_dir: Optional[Path] = None,
    level: Union[int, str] = logging.INFO,
    console: bool = False,
) -> logging.Logger:
    """Install the rotating main log, plus a stderr handler when asked.

    Args:
        base_dir: Base directory for log files
        level: Logging level or level name (``"DEBUG"``, ``"info"``, ...)
        console: Whether to also log to standard error

    Returns:
        The ``comodi`` logger every module logs under
    """
    level = resolve_level(level)
    log_dir = get_base_dir(base_dir) / LOGS_SUBDIR
    log_dir.mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)

    handlers: list[logging.Handler] = [
        RotatingFileHandler(
            log_dir / MAIN_LOG_FILE,
            maxBytes=LOG_FILE_MAX_BYTES,
            backupCount=LOG_FILE_BACKUP_COUNT,
            encoding="utf-8",
        )
    ]
    # stdout is reserved for XML artifacts
    if console:
        handlers.append(logging.StreamHandler(sys.stderr))

    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(_formatter(with_logger_name=True))
        logger.addHandler(handler)
    return logger


class RunLogger:
    """Per-run log: entry point, link entries, call totals and outcome.

    Usable as a context manager; the file handler is released on exit.
    """

    def __init__(self, run_id: str, base_dir: Optional[Path] = None):
        self.run_id = run_id
        self.log_file = get_base_dir(base_dir) / RUN_LOGS_SUBDIR / f"{run_id}.log"
        self.log_file.parent.mkdir(parents=True, exist_ok=True)

        self._logger = logging.getLogger(f"{ROOT_LOGGER}.run.{run_id}")
        self._logger.setLevel(logging.DEBUG)
        self._logger.propagate = False
        self._handler = logging.FileHandler(self.log_file, encoding="utf-8")
        self._handler.setFormatter(_formatter(with_logger_name=False))
        self._logger.addHandler(self._handler)

    def __enter__(self) -> "RunLogger":
        return self

    def __exit__(
        self,
        exc_type: Optional[type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> None:
        self.close()

    def _rule(self) -> None:
        self._logger.info("=" * SEPARATOR_WIDTH)

    def started(self, entry: str, backend: str) -> None:
        self._rule()
        self._logger.info(f"Run: {self.run_id}")
        self._logger.info(f"Project: {entry}")
        self._logger.info(f"Backend: {backend}")
        self._rule()

    def linked(self, instance_id: str, param_string: str) -> None:
        self._logger.info(f"link {instance_id}: {param_string or '(no bindings)'}")

    def finished(self, value: object, call_counts: dict[str, int]) -> None:
        if call_counts:
            self._logger.info("Calls: " + ", ".join(f"{i}={n}" for i, n in sorted(call_counts.items())))
        self._rule()
        self._logger.info(f"Run completed: {value}")

    def failed(self, message: str) -> None:
        self._rule()
        self._logger.error(f"Run failed: {message}")

    def read(self) -> str:
        """Content written so far."""
        self._handler.flush()
        return self.log_file.read_text(encoding="utf-8") if self.log_file.exists() else ""

    def close(self) -> None:
        self._handler.close()
        self._logger.removeHandler(self._handler)
