"""Shared exception types."""

from __future__ import annotations


class MicaError(Exception):
    """Base class for all errors raised by this package."""


class ScriptSyntaxError(MicaError):
    """Malformed script text. Carries the 1-based line/column of the offence."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}:{col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


class DuplicateIdError(ScriptSyntaxError):
    """The same id declared twice (nodes, sections, or top-level rules)."""

    def __init__(self, line: int, col: int, duplicate_id: str):
        super().__init__(line, col, f"duplicate id '{duplicate_id}'")
        self.duplicate_id = duplicate_id
