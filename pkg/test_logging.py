#!/usr/bin/env python3
"""Tests for the text and JSON logging formats"""
import json
import logging

from utils.logger import StructuredFormatter, setup_logger, log_with_context


def test_text_logging(capsys, monkeypatch):
    """Text logs (the default) append context as key=value pairs"""
    monkeypatch.delenv("CC_LOG_JSON", raising=False)
    logger = setup_logger("test.text", level="INFO")

    logger.info("Simple info message")
    logger.debug("Hidden debug message")
    log_with_context(
        logger, logging.INFO, "Lattice built",
        spacing=1.0,
        half_width=27,
        zeta=3.182,
    )

    err = capsys.readouterr().err
    assert "test.text - INFO - Simple info message" in err
    assert "Hidden debug message" not in err
    assert "Lattice built [spacing=1.0, half_width=27, zeta=3.182]" in err


def test_json_logging(capsys, monkeypatch):
    """CC_LOG_JSON switches to one JSON object per line with context as top-level fields"""
    monkeypatch.setenv("CC_LOG_JSON", "1")
    logger = setup_logger("test.json", level="INFO")

    log_with_context(
        logger, logging.WARNING, "Inequality violated",
        suite="lemma3",
        check="key_relation",
        margin=-1e-6,
    )

    # Test exception logging
    try:
        raise ValueError("Test exception for logging")
    except ValueError:
        logger.error("Exception with traceback:", exc_info=True)

    lines = [json.loads(line) for line in capsys.readouterr().err.splitlines() if line.strip()]
    violated, failure = lines[0], lines[-1]
    assert violated["severity"] == "WARNING"
    assert violated["message"] == "Inequality violated"
    assert violated["suite"] == "lemma3"
    assert violated["margin"] == -1e-6
    assert violated["sourceLocation"]["function"] == "test_json_logging"
    assert "ValueError: Test exception for logging" in failure["exception"]


def test_context_is_skipped_below_the_level(capsys):
    logger = setup_logger("test.quiet", level="WARNING")
    log_with_context(logger, logging.INFO, "Sweep point", zeta=4.0)
    assert capsys.readouterr().err == ""


def test_structured_formatter_serializes_unknown_types():
    record = logging.LogRecord("test.fmt", logging.INFO, __file__, 1, "Wrote report", None, None)
    record.extra_fields = {"path": object()}
    document = json.loads(StructuredFormatter().format(record))
    assert document["logger"] == "test.fmt"
    assert document["path"].startswith("<object")
