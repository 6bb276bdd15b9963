"""
Base validator class and the itemized report every verifier produces.

A failed check is never an exception: each check yields a CheckResult and
the overall verdict is derived from them.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Tuple

from verivote.errors import VerivoteError
from verivote.utils.logging_service import get_logger


class ValidationError(VerivoteError):
    """Raised when a validator cannot run at all (not for failed checks)."""
    pass


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    failures: List[Any] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        suffix = f"  {self.detail}" if self.detail else ""
        return f"{self.status}  {self.name}{suffix}"


class ValidationReport:
    """Standardized validation result container."""

    def __init__(self, subject: str = ""):
        self.subject = subject
        self.checks: List[CheckResult] = []
        self.metadata: Dict[str, Any] = {}

    def add_check(self, name: str, passed: bool, detail: str = "",
                  failures: Optional[List[Any]] = None) -> CheckResult:
        result = CheckResult(name, bool(passed), detail, list(failures or []))
        self.checks.append(result)
        return result

    def get(self, name: str) -> Optional[CheckResult]:
        for check in self.checks:
            if check.name == name:
                return check
        return None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    @property
    def failed_checks(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_lines(self) -> List[str]:
        lines = [check.line() for check in self.checks]
        lines.append(f"VERDICT  {'PASS' if self.passed else 'FAIL'}")
        return lines


CheckFunction = Callable[[ValidationReport], None]


class BaseValidator(ABC):
    """
    Base class for verifiers that run a fixed list of named checks.

    Subclasses list their checks in ``checks()``; each check appends one
    CheckResult to the report. A check that raises is recorded as failed
    with the exception message, and the remaining checks still run.
    """

    report_subject = "validation"

    def __init__(self):
        self.logger = get_logger()

    @abstractmethod
    def checks(self) -> List[Tuple[str, CheckFunction]]:
        pass

    def validate(self) -> ValidationReport:
        report = ValidationReport(self.report_subject)
        started_at = datetime.now(timezone.utc)
        self.logger.log_info(f"Starting {self.report_subject}")

        for name, check in self.checks():
            before = len(report.checks)
            try:
                check(report)
            except Exception as e:
                self.logger.log_error(f"Check {name} failed with unexpected error", exception=e, check=name)
                report.add_check(name, False, f"error: {e}")
                continue
            if len(report.checks) == before:
                report.add_check(name, False, "check produced no result")

        duration_ms = (datetime.now(timezone.utc) - started_at).total_seconds() * 1000
        report.metadata["duration_ms"] = round(duration_ms, 3)
        self.logger.log_info(
            f"Completed {self.report_subject}: {'PASS' if report.passed else 'FAIL'}",
            duration_ms=duration_ms,
            flags=len(report.failed_checks),
        )
        return report
