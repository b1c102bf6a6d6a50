"""Exception hierarchy.

Validation problems (bad shapes, non-symmetric matrices, unit vectors that
are not unit) derive from :class:`ValidationError`; failures of the
mathematical assumptions (trapping, caustics, singular determinants) derive
from :class:`DomainError`.  The CLI maps the two families onto distinct exit
codes.
"""


class SemiscatError(Exception):
    """Base class for all package errors."""


class ValidationError(SemiscatError, ValueError):
    pass


class DomainError(SemiscatError, ArithmeticError):
    pass


class DegenerateMatrix(ValidationError):
    """Real part of a matrix is not positive definite (or it is singular)."""


class DegreeCapExceeded(ValidationError):
    pass


class NonPositiveRadius(ValidationError):
    pass


class NotOrthogonal(ValidationError):
    pass


class OffShell(ValidationError):
    """A momentum that should be a unit vector is not."""


class UnsupportedOrder(ValidationError):
    pass


class SingularOnPath(DomainError):
    pass


class AmbiguousBranch(DomainError):
    pass


class StepFailure(DomainError):
    pass


class TrappedTrajectory(DomainError):
    pass


class CausticError(DomainError):
    pass


class BoxTooSmall(DomainError):
    pass


class Multimodal(DomainError):
    pass
