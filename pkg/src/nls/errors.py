"""Exception hierarchy shared by every module."""


class NLSError(Exception):
    """Base class for all errors raised by this package."""

    code = "NLSError"


class ArgumentOutOfDomain(NLSError, ValueError):
    code = "ArgumentOutOfDomain"


class NegativeArgument(ArgumentOutOfDomain):
    code = "NegativeArgument"


class InterpolationOutOfRange(ArgumentOutOfDomain):
    code = "InterpolationOutOfRange"


class PoleAtNonpositiveInteger(ArgumentOutOfDomain):
    code = "PoleAtNonpositiveInteger"


class NonConvergence(NLSError, ArithmeticError):
    code = "NonConvergence"


class QuadratureFailure(NonConvergence):
    code = "QuadratureFailure"


class NoConvergence(NonConvergence):
    """Raised by the eigensolver when the iteration budget is exhausted."""

    code = "NoConvergence"


class DegenerateSymbol(NLSError):
    """The kinetic symbol has no usable scaling/commutator constant.

    ``value`` carries the offending quantity (b(a), b'(1-) or the
    infimum of the log-slope) when one was computed.
    """

    code = "DegenerateSymbol"

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class SingularPoint(NLSError, ValueError):
    code = "SingularPoint"


class UnsupportedHarmonicDegree(NLSError, ValueError):
    code = "UnsupportedHarmonicDegree"


class DivergentNorm(NLSError, ArithmeticError):
    code = "DivergentNorm"


class BranchViolation(NLSError, ArithmeticError):
    code = "BranchViolation"


class CoincidentPoints(SingularPoint):
    code = "CoincidentPoints"


class DimensionMismatch(NLSError, ValueError):
    code = "DimensionMismatch"


class ResourceLimit(NLSError, MemoryError):
    code = "ResourceLimit"


class ConfigParse(NLSError, ValueError):
    code = "ConfigParse"
