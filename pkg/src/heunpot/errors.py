"""Exception hierarchy.

Two families: ``ValidationError`` (bad input, subclass of ``ValueError``) and
``NumericalError`` (a computation that could not deliver the requested
accuracy, subclass of ``ArithmeticError``). The CLI maps them to exit codes
1 and 2.
"""


class HeunError(Exception):
    """Base class for all package errors."""


class ValidationError(HeunError, ValueError):
    pass


class NumericalError(HeunError, ArithmeticError):
    pass


# -- validation ---------------------------------------------------------------

class InvalidTriad(ValidationError):
    pass


class NonIntegerExponent(InvalidTriad):
    pass


class CoincidentSingularities(ValidationError):
    pass


class ParameterOutOfRange(ValidationError):
    pass


class PoleAtGamma(ValidationError):
    pass


class ArgumentOnCut(ValidationError):
    pass


class OutsideDisk(ValidationError):
    pass


class PoleAtZ(ValidationError):
    pass


class OutOfBranch(ValidationError):
    pass


class PreconditionPNnonzero(ValidationError):
    pass


class TerminationPrecondition(ValidationError):
    pass


class UnsupportedTriad(ValidationError):
    pass


class GammaDegenerate(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass


class BadSpecFile(ValidationError):
    pass


# -- numerical ----------------------------------------------------------------

class NoConvergence(NumericalError):
    pass


class IndicialDegenerate(NumericalError):
    pass


class RecurrenceBreakdown(NumericalError):
    pass


class BranchViolation(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class InversionFailure(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class DerivativeBreakdown(NumericalError):
    pass
