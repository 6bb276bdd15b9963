"""
Root of the verivote exception hierarchy.

Each package declares its own errors next to the code that raises them;
they all derive from VerivoteError so callers (the CLI in particular) can
map any library failure to an exit code.
"""

from typing import Any, Optional


class VerivoteError(Exception):
    """Base exception for every error raised by verivote."""

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None):
        self.message = message
        self.field = field
        self.value = value
        super().__init__(message)
