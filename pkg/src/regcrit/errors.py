"""Exception hierarchy.

Every failure raised by the library derives from :class:`RegcritError`; the
CLI maps error classes (never messages) to exit codes.
"""


class RegcritError(Exception):
    """Base class for all library errors."""


class ParseError(RegcritError, ValueError):
    def __init__(self, message, text=None, position=None):
        self.text = text
        self.position = position
        self.detail = message
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class DivisionByZero(RegcritError, ZeroDivisionError):
    pass


class SizeLimit(RegcritError):
    pass


class NotSymmetric(RegcritError):
    pass


class NotNegativeDefinite(RegcritError):
    pass


# formal differential modules
class CyclicSearchExhausted(RegcritError):
    pass


class NondescendableLeadingPoly(RegcritError):
    pass


class CoefficientNotInA(RegcritError):
    def __init__(self, message, denominator=None):
        self.denominator = denominator
        super().__init__(message)


class CapTooSmall(RegcritError):
    pass


class NotRegular(RegcritError):
    pass


class IrrationalExponents(RegcritError):
    pass


# plane curves
class CenterNotOnLocus(RegcritError):
    pass


class IrrationalCenter(RegcritError):
    pass


class StepLimitExceeded(RegcritError):
    pass


# plane connections
class NotFlat(RegcritError):
    pass


class ComponentNotInChart(RegcritError):
    pass


class CurveInsidePolarLocus(RegcritError):
    pass


class NotSplittable(RegcritError):
    pass


class IntegrabilityViolation(RegcritError):
    pass


# criterion engine
class PrerequisiteFailed(RegcritError):
    pass


class RoutesDisagree(RegcritError):
    """The inequality route and the direct pullback reached different verdicts."""
