"""Test the logging setup."""

import io
import json
import logging

import pytest
from rich.console import Console

from netspec.config import Settings
from netspec.logging import (
    LogFormat,
    LoggingConfig,
    LogLevel,
    LogOutput,
    NetspecLogger,
    StructuredFormatter,
    config_from_settings,
    get_logger,
    logging_manager,
)


@pytest.fixture
def restore_logging():
    """Put the process-wide logging config back after the test."""
    saved = logging_manager.config.model_copy()
    yield
    logging_manager.update_config(saved)


def _record(**extra):
    record = logging.LogRecord("netspec.test", logging.INFO, "stage1.py", 10, "Stage 1 finished", None, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestStructuredFormatter:
    def test_fields(self):
        data = json.loads(StructuredFormatter().format(_record()))
        assert data["level"] == "INFO"
        assert data["logger"] == "netspec.test"
        assert data["message"] == "Stage 1 finished"
        assert "extra" not in data

    def test_extra(self):
        data = json.loads(StructuredFormatter().format(_record(run_id="r1", rank=6)))
        assert data["extra"] == {"run_id": "r1", "rank": 6}


class TestNetspecLogger:
    def test_disabled(self):
        logger = NetspecLogger("netspec.test.disabled", LoggingConfig(enabled=False))
        assert logger.logger.handlers == []

    def test_console_json(self):
        buffer = io.StringIO()
        config = LoggingConfig(format=LogFormat.JSON)
        logger = NetspecLogger("netspec.test.console", config, Console(file=buffer))
        logger.stage_complete("run", "stage1", duration=0.5, rank=3)
        data = json.loads(buffer.getvalue())
        assert data["message"] == "Stage complete: stage1 (0.50s)"
        assert data["extra"]["event"] == "stage_complete"
        assert data["extra"]["rank"] == 3

    def test_file_output(self, tmp_path):
        log_file = tmp_path / "logs" / "netspec.log"
        config = LoggingConfig(output=LogOutput.FILE, format=LogFormat.JSON, log_file=log_file)
        logger = NetspecLogger("netspec.test.file", config)
        logger.run_start("run-1", "cyclic-known", nodes=6)
        for handler in logger.logger.handlers:
            handler.flush()
        data = json.loads(log_file.read_text().strip())
        assert data["extra"]["scenario"] == "cyclic-known"
        assert data["extra"]["nodes"] == 6

    def test_level_filter(self):
        buffer = io.StringIO()
        config = LoggingConfig(format=LogFormat.SIMPLE, level=LogLevel.WARNING)
        logger = NetspecLogger("netspec.test.level", config, Console(file=buffer))
        logger.info("hidden")
        logger.warning("shown")
        assert buffer.getvalue() == "WARNING: shown\n"


class TestLoggingManager:
    def test_singleton_loggers(self):
        assert get_logger("netspec.test.same") is get_logger("netspec.test.same")

    def test_set_level(self, restore_logging):
        logger = get_logger("netspec.test.manager")
        logging_manager.set_level(LogLevel.ERROR)
        assert logger.logger.level == logging.ERROR
        assert all(h.level == logging.ERROR for h in logger.logger.handlers)

    def test_update_config_rebuilds(self, restore_logging):
        logger = get_logger("netspec.test.rebuild")
        logging_manager.update_config(LoggingConfig(enabled=False))
        assert logger.logger.handlers == []

    def test_config_from_settings(self):
        settings = Settings()
        settings.logging.level = "debug"
        settings.logging.format = "JSON"
        config = config_from_settings(settings)
        assert config.level == LogLevel.DEBUG
        assert config.format == LogFormat.JSON
