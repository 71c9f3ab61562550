"""
Custom exceptions for the bathtub toolkit.
Every error carries a machine-readable code, a message and the CLI exit code it maps to.
"""

from typing import Any

from bathtub.core.responses import ExitCode


class BathtubException(Exception):
    """Base exception for all bathtub errors."""

    def __init__(
        self,
        error: str,
        message: str,
        exit_code: ExitCode = ExitCode.USAGE,
        details: dict[str, Any] | None = None,
    ):
        self.error = error
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to an error payload dictionary."""
        payload: dict[str, Any] = {
            "error": self.error,
            "message": self.message,
        }
        if self.details:
            payload["details"] = self.details
        return payload


class DomainError(BathtubException, ValueError):
    """Invalid numeric input: bad intervals, points outside a domain, empty data."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(
            error="domain_error",
            message=message,
            exit_code=ExitCode.USAGE,
            details=details,
        )


class UsageError(BathtubException):
    """Inconsistent request: model/data mismatch, too few replications, bad flags."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(
            error="usage_error",
            message=message,
            exit_code=ExitCode.USAGE,
            details=details,
        )


class ParseError(BathtubException):
    """Input file could not be ingested. Always names the offending line."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        details: dict[str, Any] = {}
        if line is not None:
            details["line"] = line
            message = f"line {line}: {message}"
        if column is not None:
            details["column"] = column
        super().__init__(
            error="parse_error",
            message=message,
            exit_code=ExitCode.PARSE,
            details=details,
        )
        self.line = line


class VerificationFailure(BathtubException):
    """A verification suite recorded at least one violated inequality."""

    def __init__(self, suite: str, violations: int, details: dict[str, Any] | None = None):
        super().__init__(
            error="verification_failed",
            message=f"Suite '{suite}' recorded {violations} violation(s)",
            exit_code=ExitCode.VERIFICATION,
            details=details,
        )
        self.suite = suite
        self.violations = violations


class StorageException(BathtubException):
    """Reading or writing a flat file failed."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(
            error="storage_error",
            message=message,
            exit_code=ExitCode.USAGE,
            details=details,
        )
