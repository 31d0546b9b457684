"""
Exception types raised by heunwell.
"""

from typing import Any, Optional

from pydantic import ValidationError


class HeunWellError(Exception):
    """Base class for every error raised by the package."""


class DomainError(HeunWellError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NotConvergedError(HeunWellError, ArithmeticError):
    """A series evaluation reached max_terms before its tail settled."""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class MatchFailure(HeunWellError, ArithmeticError):
    """The two local solutions cannot be matched at the requested point."""


class ConfigError(HeunWellError, ValueError):
    """Invalid command-line or config-file input."""


def domain_error_cause(exc: ValidationError) -> Optional[DomainError]:
    """The DomainError a validator raised, if pydantic wrapped one."""
    for err in exc.errors():
        cause = (err.get("ctx") or {}).get("error")
        if isinstance(cause, DomainError):
            return cause
    return None
