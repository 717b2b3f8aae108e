"""Exception types shared across the package."""

from __future__ import annotations


class FcgrowError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FcgrowError):
    """Syntax error in one of the three input languages."""

    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{hint}")


class InvalidProgram(FcgrowError):
    """A flowchart program failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class IllFormedLare(FcgrowError):
    """A LARE expression failed the well-formedness check."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ConversionError(FcgrowError):
    """Flowchart-to-expression conversion could not proceed.

    kind is one of: StarAtRoot, StarBodyCheckFree, SizeBudgetExceeded.
    """

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class AnalysisError(FcgrowError):
    """Internal invariant breach in the abstract interpreter (exit code 3)."""
