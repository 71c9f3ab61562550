"""
Response utilities for the command-line surface.
Provides exit codes and standardized error / summary payloads.
"""

import json
from enum import IntEnum
from typing import Any


class ExitCode(IntEnum):
    """Process exit codes."""

    SUCCESS = 0
    USAGE = 1
    PARSE = 2
    VERIFICATION = 3


def create_error_payload(payload: dict[str, Any]) -> str:
    """
    Render an error payload (an exception's `to_dict()`) as one JSON line for stderr.

    Args:
        payload: Mapping with `error`, `message` and optional `details`

    Returns:
        JSON text without trailing newline
    """
    return json.dumps(payload, sort_keys=True, default=str)


def create_summary(name: str, passed: bool, violations: int, **fields: Any) -> str:
    """
    Create the machine-readable pass/fail summary line printed after a run.

    Args:
        name: Report or suite name
        passed: Whether every asserted check held
        violations: Number of failed checks
        **fields: Extra scalar fields to include

    Returns:
        JSON text without trailing newline
    """
    content: dict[str, Any] = {
        "name": name,
        "status": "pass" if passed else "fail",
        "violations": violations,
    }
    content.update(fields)
    return json.dumps(content, sort_keys=True, default=str)
