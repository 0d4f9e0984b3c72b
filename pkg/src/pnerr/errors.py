"""Exception hierarchy shared by every pnerr module.

Each class carries a short machine-readable ``code`` that the CLI prints on
the diagnostic stream.
"""

from __future__ import annotations


class PnerrError(Exception):
    code = "error"


class DomainError(PnerrError, ValueError):
    code = "domain"


class ResourceError(PnerrError):
    code = "resource"


class FormatError(PnerrError, ValueError):
    code = "format"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CoverageError(PnerrError, ValueError):
    code = "coverage"


class PrecisionError(PnerrError, ArithmeticError):
    code = "precision"


class AccuracyError(PnerrError, ArithmeticError):
    code = "accuracy"


class DependencyError(PnerrError):
    code = "dependency"


class FitError(PnerrError, ValueError):
    code = "fit"


class OverflowGuardError(PnerrError, OverflowError):
    code = "overflow"


class NumericalError(PnerrError, ArithmeticError):
    code = "numerical"
