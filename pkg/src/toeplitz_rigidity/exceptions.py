"""
Exception hierarchy for toeplitz_rigidity.

Every error raised on purpose by the library derives from ToeplitzError so the
CLI can map it to exit code 2 in one place.
"""


class ToeplitzError(Exception):
    """Base class for all library errors."""


class DomainError(ToeplitzError, ValueError):
    """An operation was called outside its precondition."""


class SingularSeriesError(ToeplitzError, ZeroDivisionError):
    """A series with a non-invertible constant term was inverted."""


class SingularityError(ToeplitzError):
    """An inverse theta factor was expanded around one of its zeros."""

    def __init__(self, message: str, point: complex = None):
        super().__init__(message)
        self.point = point


class PoleError(SingularityError):
    """An index formula was evaluated at (or too close to) a pole."""


class PrecisionError(ToeplitzError):
    """The requested tolerance cannot be reached within the factor cap."""


class DatasetError(ToeplitzError):
    """A dataset failed to parse, validate or satisfy a structural invariant."""

    def __init__(self, message: str, invariant: str = None):
        super().__init__(message)
        self.invariant = invariant


class InconsistentAnomalyError(ToeplitzError):
    """Fixed components disagree on the anomaly integer n."""
