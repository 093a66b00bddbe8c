"""Exception hierarchy shared across the toolkit.

Exit codes follow the CLI contract: 2 parse, 3 capability, 4 precondition,
5 numeric.
"""

from __future__ import annotations

__all__ = [
    "CrnError",
    "CrnParseError",
    "CapabilityError",
    "PreconditionError",
    "NumericError",
    "IntegrationError",
]


class CrnError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class CrnParseError(CrnError):
    """Malformed network text, history file or expression."""

    exit_code = 2

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class CapabilityError(CrnError):
    """Input exceeds a documented size limit of the implementation."""

    exit_code = 3


class PreconditionError(CrnError):
    """An operation was called outside its stated preconditions."""

    exit_code = 4


class NumericError(CrnError):
    """A numerical procedure failed to reach its tolerance."""

    exit_code = 5


class IntegrationError(NumericError):
    """Time integration left the admissible state region or blew up."""
