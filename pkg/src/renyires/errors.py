"""Exception hierarchy shared by every module of the package."""


class ResolvabilityError(Exception):
    """Base class for all package errors."""


class ModelValidationError(ResolvabilityError, ValueError):
    """A pmf, channel or model file failed validation."""


class AlphabetMismatch(ModelValidationError):
    """Two objects that must share an alphabet do not."""


class SupportViolation(ResolvabilityError, ValueError):
    """p is not absolutely continuous w.r.t. q where the order requires it."""


class SizeCapExceeded(ResolvabilityError):
    """An n-fold extension or enumeration would exceed its configured cap."""


class InfeasibleTarget(ResolvabilityError):
    """No input distribution pushes forward onto the requested target."""


class NotAType(ResolvabilityError, ValueError):
    """A pmf is not an n-type (some n * p(x) is not an integer)."""


class TypicalSetEmpty(ResolvabilityError):
    """No length-n sequence lies in the requested typical set."""


class DegenerateInput(ResolvabilityError):
    """An input distribution has a zero atom where a positive one is needed."""
