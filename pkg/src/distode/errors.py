"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class DistodeError(Exception):
    """Base class for all package errors."""


class ConstructionError(DistodeError, ValueError):
    """An object could not be built from the given data."""


class EvaluationError(DistodeError, ArithmeticError):
    """Pointwise evaluation failed, typically at a pole."""

    def __init__(self, message: str, node: object = None, point: float | None = None):
        super().__init__(message)
        self.node = node
        self.point = point


class NumericalError(DistodeError, RuntimeError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class DslSyntaxError(DistodeError, ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"syntax error at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ProblemError(DistodeError, ValueError):
    """A problem file violates its schema or an invariant."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
