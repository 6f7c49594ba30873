"""Exception hierarchy shared by the kernel, the macros and the front end."""

from __future__ import annotations


class MatchstickError(Exception):
    """Base class. ``code`` is the stable identifier used in reports and traces."""

    code = "Error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


class AmbiguousPredicate(MatchstickError, ArithmeticError):
    code = "AmbiguousPredicate"


class DegenerateDirection(MatchstickError, ValueError):
    code = "DegenerateDirection"


class CoincidentCircles(MatchstickError, ValueError):
    code = "CoincidentCircles"


class CollinearOverlap(MatchstickError, ValueError):
    code = "CollinearOverlap"


# -- board / primitive errors ------------------------------------------------


class PrimitiveError(MatchstickError):
    """A primitive instruction whose preconditions do not hold."""


class UnknownId(PrimitiveError, KeyError):
    code = "UnknownId"

    def __str__(self) -> str:  # KeyError would repr() the message
        return self.args[0] if self.args else self.code


class UnitLengthViolation(PrimitiveError):
    code = "UnitLengthViolation"


class OffsetOutOfRange(PrimitiveError):
    code = "OffsetOutOfRange"


class NoIntersection(PrimitiveError):
    code = "NoIntersection"


class PickOutOfRange(PrimitiveError):
    code = "PickOutOfRange"


class NoCrossing(PrimitiveError):
    code = "NoCrossing"


# -- macro errors --------------------------------------------------------------


class ConstructionError(MatchstickError):
    code = "ConstructionError"


class TrialExhaustion(ConstructionError):
    code = "TrialExhaustion"


class DegenerateSegment(ConstructionError):
    code = "DegenerateSegment"


class DegenerateConfiguration(ConstructionError):
    code = "DegenerateConfiguration"


class NotOnLine(ConstructionError):
    code = "NotOnLine"


# -- trace / front end ---------------------------------------------------------


class ParseError(MatchstickError):
    code = "ParseError"


class MissingOutput(MatchstickError):
    code = "MissingOutput"


class IndexOutOfRange(MatchstickError, IndexError):
    code = "IndexOutOfRange"


class AssertionFailed(MatchstickError):
    code = "AssertionFailed"
