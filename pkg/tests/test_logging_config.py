"""Tests for the package logger."""

from __future__ import annotations

import logging

import pytest

from irs_secrecy_lab.logging_config import (
    LOGGER_NAME,
    RUN_LOG_NAME,
    RunLogHandler,
    attach_run_log,
    detach_run_log,
    setup_logging,
)


@pytest.fixture
def package_logger():
    logger = setup_logging("INFO")
    yield logger
    setup_logging("INFO")


class TestSetupLogging:
    """Tests for setup_logging."""

    def test_console_carries_warnings_only(self, package_logger):
        """Test the console handler filters below WARNING."""
        (console,) = package_logger.handlers
        assert console.level == logging.WARNING
        assert package_logger.level == logging.INFO

    def test_repeated_setup_replaces_handlers(self, tmp_path):
        """Test a second setup leaves a single console handler and closes the old file."""
        setup_logging("DEBUG", str(tmp_path / "extra.log"))
        logger = setup_logging("WARNING")
        assert len(logger.handlers) == 1
        assert logger.level == logging.WARNING
        setup_logging("INFO")

    def test_extra_file(self, tmp_path, package_logger):
        """Test records reach the file given with ``log_file``."""
        path = tmp_path / "extra.log"
        logger = setup_logging("INFO", str(path))
        logger.info("dual loop settled")
        for handler in logger.handlers:
            handler.flush()
        assert "INFO - dual loop settled" in path.read_text(encoding="utf-8")


class TestRunLog:
    """Tests for the per-run log file."""

    def test_attach_creates_directory(self, tmp_path, package_logger):
        """Test the run log lands in a freshly created output directory."""
        out = tmp_path / "nested" / "runs"

        path = attach_run_log(out)
        logging.getLogger(LOGGER_NAME).info("first block solved")
        detach_run_log()

        assert path == out / RUN_LOG_NAME
        assert "first block solved" in path.read_text(encoding="utf-8")

    def test_new_directory_replaces_old(self, tmp_path, package_logger):
        """Test only the latest output directory receives records."""
        first = attach_run_log(tmp_path / "a")
        second = attach_run_log(tmp_path / "b")
        logging.getLogger(LOGGER_NAME).info("second run")
        detach_run_log()

        run_logs = [h for h in package_logger.handlers if isinstance(h, RunLogHandler)]
        assert run_logs == []
        assert "second run" not in first.read_text(encoding="utf-8")
        assert "second run" in second.read_text(encoding="utf-8")

    def test_appends_across_runs(self, tmp_path, package_logger):
        """Test reattaching to the same directory keeps earlier records."""
        for message in ("run one", "run two"):
            attach_run_log(tmp_path)
            logging.getLogger(LOGGER_NAME).warning(message)
        detach_run_log()

        text = (tmp_path / RUN_LOG_NAME).read_text(encoding="utf-8")
        assert text.index("run one") < text.index("run two")
