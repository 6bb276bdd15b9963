"""Tests for structured logging."""

import json
import logging
import sys

import pytest

from verivote.utils.logging_service import Stage, StructuredFormatter, get_logger


@pytest.fixture
def captured():
    log = get_logger()
    records = []

    class Collect(logging.Handler):
        def emit(self, record):
            records.append(record)

    handler = Collect()
    log.app_logger.addHandler(handler)
    log.set_level("DEBUG")
    yield records
    log.app_logger.removeHandler(handler)
    log.set_level("INFO")
    log.clear_election_context()


def test_formatter_emits_json_with_context():
    record = logging.LogRecord("verivote.services", logging.WARNING, __file__, 10, "flagged %s", ("x",), None)
    record.booth_id = 3
    record.reason = "rid_proximity"
    entry = json.loads(StructuredFormatter().format(record))
    assert entry["message"] == "flagged x"
    assert entry["level"] == "WARNING"
    assert entry["booth_id"] == 3
    assert entry["reason"] == "rid_proximity"
    assert "voter_index" not in entry


def test_formatter_includes_exceptions():
    try:
        raise ValueError("bad board")
    except ValueError:
        record = logging.LogRecord("verivote", logging.ERROR, __file__, 1, "failed", (), sys.exc_info())
    entry = json.loads(StructuredFormatter().format(record))
    assert entry["exception"]["type"] == "ValueError"
    assert entry["exception"]["message"] == "bad board"


def test_stage_context_records_metrics(captured):
    log = get_logger()
    with log.stage_context(Stage.TALLY, "abc123") as metrics:
        metrics.records = 12
    assert metrics.duration_ms is not None
    assert metrics.records == 12
    completed = [r for r in captured if r.getMessage() == "Stage completed"]
    assert completed and completed[0].records == 12
    assert completed[0].election_id == "abc123"


def test_stage_context_logs_failures(captured):
    log = get_logger()
    with pytest.raises(RuntimeError):
        with log.stage_context(Stage.POLLING, "abc123"):
            raise RuntimeError("booth down")
    assert any(r.getMessage() == "Stage completed" for r in captured)


def test_election_context_is_per_thread(captured):
    log = get_logger()
    log.set_election_context("abc123", stage="polling", booth_id=2)
    log.log_info("Booth polling finished", records=6)
    record = captured[-1]
    assert (record.election_id, record.stage, record.booth_id, record.records) == ("abc123", "polling", 2, 6)


def test_set_level_applies_to_performance_logs():
    log = get_logger()
    log.set_level("WARNING")
    try:
        assert not log.perf_logger.isEnabledFor(logging.INFO)
    finally:
        log.set_level("INFO")
