"""
Tests for the logging_config module.

Covers the custom formatter, run directory mirroring and step timing.

Run these tests with: pytest tests/unit/test_logging.py -v
"""

import logging
from pathlib import Path

import pytest

from periodic_asymptotics.logging_config import RUN_LOG_NAME, CustomFormatter, get_logger, log_duration, setup_logging


class TestCustomFormatter:
    """Tests for CustomFormatter class."""

    def test_formatter_initialization(self):
        """Test that formatter initializes correctly."""
        formatter = CustomFormatter()
        assert isinstance(formatter.project_root, Path)

    def test_formatter_with_custom_project_root(self, tmp_path):
        """
        Test formatter with custom project root.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        formatter = CustomFormatter(project_root=tmp_path)
        assert formatter.project_root == tmp_path

    def test_find_project_root_in_marked_directory(self, temp_project_root):
        """
        Test that project root detection stops at pyproject.toml.

        :param temp_project_root: Pytest fixture providing marked temporary root
        :ptype temp_project_root: Path
        """
        formatter = CustomFormatter()
        assert formatter.project_root == temp_project_root

    def test_format_adds_relative_path(self, project_root):
        """
        Test that format adds dotted relative_path to log record.

        :param project_root: Pytest fixture providing project root path
        :ptype project_root: Path
        """
        formatter = CustomFormatter(fmt="%(relative_path)s - %(message)s", project_root=project_root)
        record = logging.LogRecord(
            name="test", level=logging.INFO, pathname=__file__, lineno=1, msg="Test message", args=(), exc_info=None
        )

        formatter.format(record)

        assert record.relative_path == "tests.unit.test_logging"

    def test_format_falls_back_to_module_outside_root(self, tmp_path):
        """
        Test that records from outside the project root use module name.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        formatter = CustomFormatter(project_root=tmp_path / "elsewhere")
        record = logging.LogRecord(
            name="test", level=logging.INFO, pathname=__file__, lineno=1, msg="Test message", args=(), exc_info=None
        )

        formatter.format(record)

        assert record.relative_path == "test_logging"

    def test_format_adds_metaclass_name(self):
        """Test that format adds metaclass_name to log record."""
        formatter = CustomFormatter(fmt="%(metaclass_name)s%(message)s")
        record = logging.LogRecord(
            name="test", level=logging.INFO, pathname=__file__, lineno=1, msg="Test message", args=(), exc_info=None
        )

        formatter.format(record)

        assert isinstance(record.metaclass_name, str)


class TestSetupLogging:
    """Tests for setup_logging function."""

    def test_setup_logging_default(self, clean_env):
        """
        Test setting up logging with defaults.

        :param clean_env: Pytest fixture removing PERIODICASYM_ variables
        :ptype clean_env: None
        """
        logger = setup_logging()
        assert logger is logging.getLogger()
        assert logger.level == logging.INFO
        assert len(logger.handlers) == 1

    def test_setup_logging_with_level(self):
        """Test setting up logging with specific level."""
        assert setup_logging(level="DEBUG").level == logging.DEBUG
        assert setup_logging(level="error").level == logging.ERROR

    def test_setup_logging_rejects_unknown_level(self):
        """Test that unknown level names raise ValueError."""
        with pytest.raises(ValueError, match="Unknown log level"):
            setup_logging(level="LOUD")

    def test_setup_logging_with_env_var(self, monkeypatch):
        """
        Test that setup_logging respects PERIODICASYM_LOG_LEVEL.

        :param monkeypatch: Pytest fixture for modifying environment
        :ptype monkeypatch: pytest.MonkeyPatch
        """
        monkeypatch.setenv("PERIODICASYM_LOG_LEVEL", "WARNING")
        assert setup_logging().level == logging.WARNING

    def test_setup_logging_with_file(self, tmp_path):
        """
        Test setting up logging with file output.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        log_file = tmp_path / "logs" / "test.log"

        logger = setup_logging(log_file=str(log_file))
        logger.info("Test message")

        assert any(isinstance(h, logging.FileHandler) for h in logger.handlers)
        assert "Test message" in log_file.read_text()

    def test_setup_logging_mirrors_into_run_dir(self, tmp_path):
        """
        Test that run_dir receives a run.log copy.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        run_dir = tmp_path / "run"

        setup_logging(level="INFO", run_dir=run_dir)
        get_logger(__name__).info("Assembling monodromy")

        assert "Assembling monodromy" in (run_dir / RUN_LOG_NAME).read_text()

    def test_setup_logging_custom_format(self):
        """Test setting up logging with custom format."""
        logger = setup_logging(format_string="%(levelname)s: %(message)s")
        assert isinstance(logger.handlers[0].formatter, CustomFormatter)

    def test_setup_logging_clears_existing_handlers(self):
        """Test that setup_logging clears existing handlers."""
        first = len(setup_logging().handlers)
        second = len(setup_logging().handlers)
        assert first == second


class TestGetLogger:
    """Tests for get_logger function."""

    def test_get_logger_returns_named_logger(self):
        """Test that get_logger returns logger instance."""
        logger = get_logger("test")
        assert isinstance(logger, logging.Logger)
        assert logger.name == "test"

    def test_multiple_get_logger_calls_return_same_instance(self):
        """Test that multiple calls return same logger instance."""
        assert get_logger("test") is get_logger("test")


class TestLogDuration:
    """Tests for log_duration context manager."""

    def test_log_duration_reports_label(self, capture_logs):
        """
        Test that timing line names the step.

        :param capture_logs: Pytest fixture capturing root log output
        :ptype capture_logs: StringIO
        """
        with log_duration(get_logger(__name__), "assemble"):
            pass

        output = capture_logs.getvalue()
        assert "assemble started" in output
        assert "assemble finished in" in output

    def test_log_duration_reports_on_error(self, capture_logs):
        """
        Test that timing line is written when block raises.

        :param capture_logs: Pytest fixture capturing root log output
        :ptype capture_logs: StringIO
        """
        with pytest.raises(RuntimeError):
            with log_duration(get_logger(__name__), "spectrum"):
                raise RuntimeError("boom")

        assert "spectrum finished in" in capture_logs.getvalue()


class TestLoggingIntegration:
    """Integration tests for logging functionality."""

    def test_logging_format_includes_all_fields(self, tmp_path):
        """
        Test that log format includes all required fields.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        log_file = tmp_path / "format_test.log"
        setup_logging(level="INFO", log_file=str(log_file))

        get_logger(__name__).info("Test message with all fields")
        get_logger(__name__).debug("Debug message")

        content = log_file.read_text()
        assert "INFO" in content
        assert "Test message with all fields" in content
        assert "test_logging" in content
        assert "test_logging_format_includes_all_fields" in content
        assert "Debug message" not in content

    def test_logging_with_class_method(self, tmp_path):
        """
        Test logging from within class method records the class name.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """

        class Sweep:
            """Helper class logging from a method."""

            def emit(self) -> None:
                """
                Emit one record.

                :return: None
                :rtype: None
                """
                get_logger(__name__).info("Message from class method")

        log_file = tmp_path / "class_test.log"
        setup_logging(level="INFO", log_file=str(log_file))

        Sweep().emit()

        content = log_file.read_text()
        assert "Message from class method" in content
        assert "Sweep.emit" in content
