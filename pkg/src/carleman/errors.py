"""Exception hierarchy shared by every module."""


class CarlemanError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CarlemanError, ValueError):
    """An argument lies outside the domain of the operation."""


class BranchError(DomainError):
    """A value needed under the principal logarithm is not in the right half-plane."""


class ClassError(DomainError):
    """An instance does not belong to the class an operation requires."""


class DegenerateError(DomainError):
    """A quantity that must be positive (typically N) vanished."""


class SingularGramError(CarlemanError, ArithmeticError):
    """Gram matrix is singular or too ill-conditioned to invert."""


class ZeroOnSegmentError(DomainError):
    """The image segment of a two-kernel function passes through zero."""


class NonConvergenceError(CarlemanError, RuntimeError):
    """An iterative numerical procedure failed to meet its tolerance."""


class InconclusiveError(NonConvergenceError):
    """A numerical test could not reach a verdict (e.g. winding number)."""
