"""Exception types raised by cbpmde."""


class CBPError(Exception):
    """Base class for all package errors."""


class DomainError(CBPError, ValueError):
    """A parameter lies outside the family's parameter interval."""


class UndefinedScoreError(CBPError, ValueError):
    """The score is requested at a point of zero model mass."""


class InvalidContaminationError(CBPError, ValueError):
    """A gross-error mixture would put negative mass somewhere."""


class SubcriticalScheduleError(CBPError, ValueError):
    """No observation horizon exists for a non-supercritical growth rate."""


class NoProgenitorsError(CBPError):
    """The family tree contains no progenitors, so nothing can be estimated."""


class GradientUndefinedError(CBPError):
    """The disparity gradient diverges (unbounded RAF at an infinite residual)."""


class NoFiniteValueError(CBPError):
    """The disparity is infinite at every scanned parameter value."""


class DegenerateRatioError(CBPError, ZeroDivisionError):
    """A mean squared error ratio has a zero denominator."""


class EmptySampleError(CBPError, ValueError):
    """A statistic was requested on an empty sample."""


class TreeFormatError(CBPError, ValueError):
    """A serialized family tree could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
