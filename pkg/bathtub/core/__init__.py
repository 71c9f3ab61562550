"""Core utilities: exceptions and response helpers."""

from bathtub.core.exceptions import (
    BathtubException,
    DomainError,
    ParseError,
    StorageException,
    UsageError,
    VerificationFailure,
)
from bathtub.core.responses import ExitCode, create_error_payload, create_summary

__all__ = [
    "BathtubException",
    "DomainError",
    "ParseError",
    "StorageException",
    "UsageError",
    "VerificationFailure",
    "ExitCode",
    "create_error_payload",
    "create_summary",
]
