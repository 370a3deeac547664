"""Exception hierarchy shared by every simast-review module."""

from __future__ import annotations


class SimastError(Exception):
    """Base class for all errors raised by simast-review."""


class ReviewDataError(SimastError, ValueError):
    """Input data that cannot be turned into review pairs."""


class ParseError(ReviewDataError):
    """Source text outside the supported method-level subset."""

    def __init__(self, position: int, message: str) -> None:
        super().__init__(f"offset {position}: {message}")
        self.position = position
        self.message = message


class InterchangeSchemaError(ReviewDataError):
    """An interchange document that violates the node schema."""

    def __init__(self, rule: str, path: str = "$") -> None:
        super().__init__(f"{path}: {rule}")
        self.rule = rule
        self.path = path


class RecordError(ReviewDataError):
    """A malformed line in a JSONL input file."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigError(SimastError, ValueError):
    """Invalid configuration values or config file syntax."""


class ShapeError(SimastError, ValueError):
    """Tensor shapes that an operation cannot combine."""


class NumericError(SimastError, ArithmeticError):
    """A computation produced NaN or infinite values."""


class StatisticsError(SimastError, ValueError):
    """A metric or test statistic that is undefined for the given input."""


class MissingGradientError(SimastError, RuntimeError):
    """An optimizer step on a parameter that never received a gradient."""
