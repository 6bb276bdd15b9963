"""
Receipt, universal, individual and statistical verification.
"""

from verivote.validators.base_validator import (
    BaseValidator,
    CheckResult,
    ValidationError,
    ValidationReport,
)

__all__ = ["BaseValidator", "CheckResult", "ValidationError", "ValidationReport"]
