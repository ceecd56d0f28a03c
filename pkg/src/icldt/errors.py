"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


class ICLError(Exception):
    """Base error carrying a stable machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(ICLError):
    def __init__(self, message: str, span: SourceSpan, code: str = "SYNTAX"):
        super().__init__(code, f"{message} at {span}")
        self.span = span


class ResourceLimitError(ICLError):
    """Raised when an enumeration would exceed its configured bound."""

    def __init__(self, message: str, count: int):
        super().__init__("TOO_LARGE", message)
        self.count = count
