"""
Logging configuration for periodic_asymptotics.

Every record carries the level, timestamp, module path relative to the
project root, enclosing class (when logged from a method), function and
line number:

Format: %(levelname)-8s %(asctime)s %(relative_path)s.%(metaclass_name)s%(funcName)s.%(lineno)d: %(message)s

Runs of the command line front-end additionally mirror the log into
``run.log`` inside their output directory.
"""

import inspect
import logging
import os
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from periodic_asymptotics.interfaces import LogFormatter

DEFAULT_FORMAT = "%(levelname)-8s %(asctime)s %(relative_path)s.%(metaclass_name)s%(funcName)s.%(lineno)d: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
RUN_LOG_NAME = "run.log"


class CustomFormatter(logging.Formatter, LogFormatter):
    """
    Formatter that adds relative_path and metaclass_name to log records.

    - relative_path: dotted path of the emitting file relative to project root
    - metaclass_name: class of ``self``/``cls`` in the logging frame, if any
    """

    def __init__(self, fmt: str | None = None, datefmt: str | None = None, project_root: Path | None = None):
        """
        Initialize custom formatter.

        :param fmt: Log format string (uses default if None)
        :ptype fmt: str | None
        :param datefmt: Date format string (uses default if None)
        :ptype datefmt: str | None
        :param project_root: Project root directory (auto-detected if None)
        :ptype project_root: Path | None
        """
        super().__init__(fmt, datefmt)
        self.project_root = project_root or self._find_project_root()

    @staticmethod
    def _find_project_root() -> Path:
        """
        Find project root by looking for pyproject.toml or .git directory.
        Falls back to current working directory if not found.

        :return: Path to project root directory
        :rtype: Path
        """
        current = Path.cwd()
        for parent in [current, *current.parents]:
            if (parent / "pyproject.toml").exists() or (parent / ".git").exists():
                return parent
        return current

    def _relative_path(self, record: logging.LogRecord) -> str:
        """
        Dotted module path of record relative to project root.

        :param record: Log record being formatted
        :ptype record: logging.LogRecord
        :return: Dotted path without .py suffix, or module name
        :rtype: str
        """
        try:
            relative = Path(record.pathname).relative_to(self.project_root)
        except (ValueError, AttributeError):
            return record.module
        dotted = str(relative).replace(os.sep, ".")
        return dotted[:-3] if dotted.endswith(".py") else dotted

    @staticmethod
    def _caller_class_name(record: logging.LogRecord) -> str:
        """
        Class name of the frame that emitted record, best effort.

        :param record: Log record being formatted
        :ptype record: logging.LogRecord
        :return: Class name or empty string
        :rtype: str
        """
        try:
            frame = inspect.currentframe()
            while frame is not None:
                code = frame.f_code
                if code.co_name == record.funcName and code.co_filename == record.pathname:
                    caller_locals = frame.f_locals
                    if "self" in caller_locals:
                        return caller_locals["self"].__class__.__name__
                    if "cls" in caller_locals and isinstance(caller_locals["cls"], type):
                        return caller_locals["cls"].__name__
                    return ""
                frame = frame.f_back
        except Exception:
            pass
        return ""

    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record with custom attributes.

        :param record: Log record to format
        :ptype record: logging.LogRecord
        :return: Formatted log string
        :rtype: str
        """
        record.relative_path = self._relative_path(record)
        class_name = self._caller_class_name(record)
        record.metaclass_name = f"{class_name}." if class_name else ""
        return super().format(record)


def setup_logging(
    level: str | None = None,
    log_file: str | None = None,
    format_string: str | None = None,
    run_dir: Path | None = None,
) -> logging.Logger:
    """
    Set up logging with custom formatter.

    :param level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
                  Defaults to PERIODICASYM_LOG_LEVEL env var or INFO.
    :ptype level: str | None
    :param log_file: Optional file path to write logs to.
                     Defaults to PERIODICASYM_LOG_FILE env var.
    :ptype log_file: str | None
    :param format_string: Custom format string. Uses standard format if not provided.
    :ptype format_string: str | None
    :param run_dir: Output directory of a run; adds a run.log handler there
    :ptype run_dir: Path | None
    :return: Configured root logger
    :rtype: logging.Logger
    :raises ValueError: If level is not a known logging level name

    Example::

        >>> from periodic_asymptotics import setup_logging
        >>> logger = setup_logging(level="DEBUG")
        >>> logger.info("Reproducing example 5.2")
    """
    if level is None:
        level = os.getenv("PERIODICASYM_LOG_LEVEL", "INFO")
    if log_file is None:
        log_file = os.getenv("PERIODICASYM_LOG_FILE")

    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Unknown log level: {level}")

    formatter = CustomFormatter(fmt=format_string or DEFAULT_FORMAT, datefmt=DATE_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    targets = [Path(log_file)] if log_file else []
    if run_dir is not None:
        targets.append(Path(run_dir) / RUN_LOG_NAME)
    for target in targets:
        target.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(target)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name: str) -> logging.Logger:
    """
    Get logger with specified name.

    :param name: Logger name (typically __name__)
    :ptype name: str
    :return: Logger instance
    :rtype: logging.Logger

    Example::

        >>> from periodic_asymptotics import get_logger
        >>> logger = get_logger(__name__)
        >>> logger.info("Assembling monodromy")
    """
    return logging.getLogger(name)


@contextmanager
def log_duration(logger: logging.Logger, label: str) -> Iterator[None]:
    """
    Log wall-clock duration of the enclosed block at INFO level.

    :param logger: Logger receiving the timing line
    :ptype logger: logging.Logger
    :param label: Name of the timed step
    :ptype label: str
    :return: Context manager yielding nothing
    :rtype: Iterator[None]

    Example::

        >>> with log_duration(logger, "assemble"):
        ...     operator = assemble(solver)
    """
    start = time.perf_counter()
    logger.debug("%s started", label)
    try:
        yield
    finally:
        logger.info("%s finished in %.3f s", label, time.perf_counter() - start)
