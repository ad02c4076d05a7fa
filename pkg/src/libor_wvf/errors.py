"""Exception hierarchy.

Data problems (bad input files, mismatched shapes, invalid parameters) derive
from :class:`DataError`; numerical failures (singular designs, degenerate
arrays, unstable time steps) derive from :class:`NumericError`.  The CLI maps
the two families to distinct exit codes.
"""


class LiborWvfError(Exception):
    """Base class for every error raised by this package."""


class DataError(LiborWvfError, ValueError):
    pass


class NumericError(LiborWvfError, ArithmeticError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingBenchmark(DataError):
    pass


class EmptyEntity(DataError):
    pass


class NoOverlap(DataError):
    pass


class DateMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class TooFewObservations(DataError):
    pass


class TooFewQuotes(DataError):
    pass


class InvalidSpec(DataError):
    pass


class InvalidAlpha(DataError):
    pass


class NotSeparable(DataError):
    pass


class ConfigError(DataError):
    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"config key {key!r}: {reason}")


class SingularDesign(NumericError):
    def __init__(self, message, condition_number=None):
        self.condition_number = condition_number
        if condition_number is not None:
            message = f"{message} (condition number {condition_number:.3e})"
        super().__init__(message)


class ZeroVariance(NumericError):
    pass


class GridTooCoarse(NumericError):
    pass


class UnstableStep(NumericError):
    pass
