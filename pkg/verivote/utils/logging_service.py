"""
Structured logging for verivote.
Provides JSON log records, per-thread election context and stage timing.

Secrets (scalars, openings, token secret parts, private keys) are never
passed to any logger; only counts, identifiers and flag reasons are.
"""

import json
import logging
import os
import threading
import time
import traceback
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional

import psutil

# Fields copied from the record into the JSON line when present
CONTEXT_FIELDS = (
    "election_id",
    "stage",
    "booth_id",
    "voter_index",
    "duration_ms",
    "records",
    "flags",
    "memory_usage_mb",
    "operation",
    "check",
    "reason",
)


class StructuredFormatter(logging.Formatter):
    """One JSON object per record, with election context fields when set"""

    def format(self, record):
        log_entry = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        for name in CONTEXT_FIELDS:
            if hasattr(record, name):
                log_entry[name] = getattr(record, name)

        if record.exc_info:
            log_entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": traceback.format_exception(*record.exc_info),
            }

        return json.dumps(log_entry, default=str)


class Stage(Enum):
    """Election stages as they appear in logs"""
    SETUP = "setup"
    TOKEN_GENERATION = "token_generation"
    TOKEN_AUDIT = "token_audit"
    POLLING = "polling"
    BOOTH_CLOSE = "booth_close"
    COLLECTION = "collection"
    PUBLICATION = "publication"
    TALLY = "tally"
    UNIVERSAL_VERIFICATION = "universal_verification"
    INDIVIDUAL_VERIFICATION = "individual_verification"
    TAMPER = "tamper"


@dataclass
class StageMetrics:
    """Metrics collected while one stage runs"""
    stage: str
    election_id: str
    start_time: datetime
    end_time: Optional[datetime] = None
    duration_ms: Optional[float] = None
    records: int = 0
    flags: int = 0
    peak_memory_mb: float = 0.0
    notes: List[Dict[str, Any]] = field(default_factory=list)


class LoggingService:
    """Centralized logging with election context and stage metrics"""

    def __init__(self):
        self._setup_loggers()
        self._context = threading.local()
        self._active_stages: Dict[str, StageMetrics] = {}
        self._lock = threading.Lock()

    def _setup_loggers(self):
        # Main application logger
        self.app_logger = logging.getLogger("verivote")
        self.app_logger.setLevel(logging.INFO)

        # Performance logger
        self.perf_logger = logging.getLogger("verivote.performance")
        self.perf_logger.setLevel(logging.INFO)

        # Error logger
        self.error_logger = logging.getLogger("verivote.errors")
        self.error_logger.setLevel(logging.ERROR)

        if not self.app_logger.handlers:
            console_handler = logging.StreamHandler()
            console_handler.setFormatter(StructuredFormatter())
            self.app_logger.addHandler(console_handler)
            # children propagate to the app logger's handler
            self.app_logger.propagate = False

    def set_level(self, level: str):
        self.app_logger.setLevel(level.upper())
        self.perf_logger.setLevel(level.upper())

    def set_election_context(self, election_id: str, stage: Optional[str] = None,
                             booth_id: Optional[int] = None):
        """Set election context for the current thread"""
        context = {"election_id": election_id}
        if stage is not None:
            context["stage"] = stage
        if booth_id is not None:
            context["booth_id"] = booth_id
        self._context.context = context

    def clear_election_context(self):
        if hasattr(self._context, "context"):
            delattr(self._context, "context")

    def _get_log_extra(self, **kwargs) -> Dict[str, Any]:
        extra = {}
        if hasattr(self._context, "context"):
            extra.update(self._context.context)
        extra.update({k: v for k, v in kwargs.items() if v is not None})
        return extra

    def log_info(self, message: str, **kwargs):
        self.app_logger.info(message, extra=self._get_log_extra(**kwargs))

    def log_warning(self, message: str, **kwargs):
        self.app_logger.warning(message, extra=self._get_log_extra(**kwargs))

    def log_error(self, message: str, exception: Optional[Exception] = None, **kwargs):
        """Log error message with exception details"""
        if exception:
            self.error_logger.error(message, exc_info=(type(exception), exception, exception.__traceback__),
                                    extra=self._get_log_extra(**kwargs))
        else:
            self.error_logger.error(message, extra=self._get_log_extra(**kwargs))

    def log_performance(self, message: str, duration_ms: Optional[float] = None,
                        memory_usage_mb: Optional[float] = None, **kwargs):
        extra = self._get_log_extra(**kwargs)
        if duration_ms is not None:
            extra["duration_ms"] = round(duration_ms, 3)
        if memory_usage_mb is not None:
            extra["memory_usage_mb"] = round(memory_usage_mb, 2)
        self.perf_logger.info(message, extra=extra)

    def start_stage_tracking(self, stage: Stage, election_id: str) -> StageMetrics:
        """Start tracking a stage and set the thread context"""
        metrics = StageMetrics(
            stage=stage.value,
            election_id=election_id,
            start_time=datetime.now(timezone.utc),
        )
        with self._lock:
            self._active_stages[f"{election_id}:{stage.value}"] = metrics
        self.set_election_context(election_id, stage=stage.value)
        self.log_info("Stage started")
        return metrics

    def end_stage_tracking(self, stage: Stage, election_id: str, records: int = 0,
                           flags: int = 0) -> Optional[StageMetrics]:
        key = f"{election_id}:{stage.value}"
        with self._lock:
            metrics = self._active_stages.pop(key, None)
        if metrics is None:
            self.log_warning(f"Stage {stage.value} was not started")
            return None

        metrics.end_time = datetime.now(timezone.utc)
        metrics.duration_ms = (metrics.end_time - metrics.start_time).total_seconds() * 1000
        metrics.records = records
        metrics.flags = flags
        metrics.peak_memory_mb = current_memory_mb()

        self.log_performance(
            "Stage completed",
            duration_ms=metrics.duration_ms,
            memory_usage_mb=metrics.peak_memory_mb,
            records=records,
            flags=flags,
        )
        self.clear_election_context()
        return metrics

    @contextmanager
    def stage_context(self, stage: Stage, election_id: str):
        """Context manager wrapping start_stage_tracking/end_stage_tracking.

        Yields the StageMetrics so the caller can fill in record and flag
        counts before the stage is closed.
        """
        metrics = self.start_stage_tracking(stage, election_id)
        try:
            yield metrics
        except Exception as exc:
            self.log_error(f"Stage {stage.value} failed", exception=exc)
            raise
        finally:
            self.end_stage_tracking(stage, election_id, records=metrics.records, flags=metrics.flags)

    @contextmanager
    def performance_timer(self, operation_name: str, **kwargs):
        """Log how long the wrapped block took"""
        start_time = time.perf_counter()
        try:
            yield
        finally:
            duration_ms = (time.perf_counter() - start_time) * 1000
            self.log_performance(
                f"Operation completed: {operation_name}",
                duration_ms=duration_ms,
                operation=operation_name,
                **kwargs,
            )


def current_memory_mb() -> float:
    """Resident memory of this process in MiB"""
    process = psutil.Process(os.getpid())
    return process.memory_info().rss / 1024 / 1024


# Global logging service instance
logging_service = LoggingService()


def get_logger() -> LoggingService:
    """Process-wide LoggingService"""
    return logging_service
