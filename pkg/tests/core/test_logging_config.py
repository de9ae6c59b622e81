"""
Test logging configuration module for core shared components.

Tests the logging setup functionality including:
- Logging configuration initialization
- Handler creation and management
- Console and file logging behavior
- Filter functionality for different log levels
"""
import logging
import os
from unittest.mock import MagicMock, patch

import pytest

from src.core.logging_config import (
    CONSOLE_INFO_LOGGERS,
    LOG_FILENAME,
    LOGS_DIR,
    ConsoleFilter,
    setup_logging,
)


def _record(level, name):
    record = MagicMock()
    record.levelno = level
    record.name = name
    return record


@pytest.mark.unit
class TestConsoleFilter:
    """Test which records reach the console."""

    def test_console_filter_allows_warning_and_above(self):
        """Test that ConsoleFilter allows WARNING and above from any logger."""
        console_filter = ConsoleFilter()
        for level in (logging.WARNING, logging.ERROR, logging.CRITICAL):
            assert console_filter.filter(_record(level, 'src.sampler.chain')) is True

    def test_console_filter_allows_cli_info(self):
        """Test that ConsoleFilter allows INFO messages from the CLI module."""
        assert ConsoleFilter().filter(_record(logging.INFO, 'src.cli.main')) is True

    def test_console_filter_allows_main_info(self):
        """Test that ConsoleFilter allows INFO messages from __main__."""
        assert ConsoleFilter().filter(_record(logging.INFO, '__main__')) is True

    def test_console_filter_blocks_library_info_and_debug(self):
        """Test that INFO and DEBUG from computation modules stay off the console."""
        console_filter = ConsoleFilter()
        assert console_filter.filter(_record(logging.INFO, 'src.phase.solver')) is False
        assert console_filter.filter(_record(logging.DEBUG, 'src.phase.solver')) is False

    def test_console_info_loggers_constant(self):
        """Test the whitelist of console INFO loggers."""
        assert CONSOLE_INFO_LOGGERS == ("src.cli.main", "__main__")


@pytest.mark.unit
class TestSetupLogging:
    """Test handler installation by setup_logging."""

    @patch('src.core.logging_config.os.makedirs')
    def test_setup_logging_creates_logs_directory(self, mock_makedirs):
        """Test that setup_logging creates the logs directory."""
        setup_logging()
        mock_makedirs.assert_called_with(LOGS_DIR, exist_ok=True)

    def test_setup_logging_configures_root_logger(self):
        """Test that setup_logging configures the root logger properly."""
        root_logger = logging.getLogger()
        original_handlers = root_logger.handlers.copy()
        original_level = root_logger.level

        try:
            root_logger.handlers.clear()
            setup_logging()

            assert root_logger.level == logging.INFO
            assert len(root_logger.handlers) >= 2  # Should have console and file handlers
        finally:
            root_logger.handlers = original_handlers
            root_logger.level = original_level

    def test_setup_logging_avoids_duplicate_handlers(self):
        """Test that setup_logging doesn't add duplicate handlers."""
        root_logger = logging.getLogger()

        setup_logging()
        first_count = len(root_logger.handlers)

        setup_logging()
        second_count = len(root_logger.handlers)

        assert first_count == second_count

    def test_setup_logging_quiets_numeric_libraries(self):
        """Test that numpy and scipy loggers are raised to WARNING."""
        setup_logging()

        assert logging.getLogger("numpy").level == logging.WARNING
        assert logging.getLogger("scipy").level == logging.WARNING

    def test_setup_logging_configures_file_handler(self):
        """Test that setup_logging configures file handler with rotation."""
        root_logger = logging.getLogger()
        original_handlers = root_logger.handlers.copy()

        try:
            root_logger.handlers.clear()
            setup_logging()

            file_handlers = [h for h in root_logger.handlers
                             if h.__class__.__name__ == 'RotatingFileHandler']
            assert len(file_handlers) > 0, "No RotatingFileHandler found"

            file_handler = file_handlers[0]
            assert file_handler.level == logging.INFO
            assert file_handler.maxBytes == 1*1024*1024  # 1MB
            assert file_handler.backupCount == 5
        finally:
            root_logger.handlers = original_handlers

    def test_log_filename_constant(self):
        """Test that LOG_FILENAME lives under LOGS_DIR."""
        assert LOG_FILENAME == os.path.join(LOGS_DIR, "lab.log")

    def test_integration_logging_works_after_setup(self):
        """Integration test: verify logging works after setup."""
        setup_logging()

        test_logger = logging.getLogger('test.integration')

        # This should not raise an exception
        test_logger.info("Test info message")
        test_logger.warning("Test warning message")
