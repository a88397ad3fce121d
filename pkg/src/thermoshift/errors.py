"""Exception hierarchy shared by all thermoshift modules."""


class ThermoshiftError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(ThermoshiftError, ValueError):
    """Input that violates a structural constraint (bad matrix, bad cylinder, ...)."""


class BadEntry(ValidationError):
    pass


class EmptySubshift(ValidationError):
    pass


class NotMixing(ValidationError):
    pass


class NotAReturnWord(ValidationError):
    pass


class CensoredDelta(ValidationError):
    """The depth of a word is only known as a lower bound below the threshold."""


class DepthTooSmall(ValidationError):
    pass


class NotSingleForbiddenBlock(ValidationError):
    pass


class NumericError(ThermoshiftError, ArithmeticError):
    """Numerical failure: non-convergence, divergence, missing bracket."""


class NoConvergence(NumericError):
    pass


class Divergent(NumericError):
    pass


class NoBracket(NumericError):
    pass


class CountOverflow(NumericError, OverflowError):
    pass


class BoundViolated(NumericError):
    """An inequality that must hold mathematically failed: implementation bug."""


class ViolationFound(NumericError):
    def __init__(self, message, measure=None):
        super().__init__(message)
        self.measure = measure


class DecompositionMismatch(ThermoshiftError, AssertionError):
    pass


class BudgetExceeded(ThermoshiftError, RuntimeError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
