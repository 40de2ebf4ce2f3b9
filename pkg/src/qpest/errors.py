"""Exception types shared across the package."""

from __future__ import annotations


class QpestError(ValueError):
    """Domain error: invalid input, failed validation, or exceeded cap."""


class CircuitSyntaxError(QpestError):
    """Circuit file rejected by the parser; carries the source location."""

    def __init__(self, message: str, line: int, column: int | None = None):
        loc = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{loc}: {message}")
        self.line = line
        self.column = column


class OracleCapError(QpestError):
    """Requested exact computation exceeds the documented size caps."""
