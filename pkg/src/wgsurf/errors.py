"""Exception hierarchy shared across the package."""


class WgsurfError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(WgsurfError, ValueError):
    """An argument is outside its documented range."""


class NonClosableCurveError(WgsurfError):
    """The closure correction for a tangent-angle curve did not converge."""


class WrongProfileKindError(WgsurfError, TypeError):
    """A smooth-profile routine was called with a broken profile (or vice versa)."""


class DegenerateGroundStateError(WgsurfError):
    """Ground state of the transverse operator came out (numerically) degenerate.

    The ground eigenvalue of a real periodic Sturm-Liouville operator is
    simple, so this signals a bad discretization, not physics.
    """


class DomainTooSmallError(WgsurfError):
    """A quantity that must decay at the grid ends does not."""


class TruncatedSupportError(WgsurfError):
    """A trial function's support does not fit inside the strip grid."""


class ConvergenceError(WgsurfError):
    """Iterative eigensolver failed to converge.

    Carries the best residual norms achieved so far in ``residuals``.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegenerateQuadraticError(WgsurfError):
    """The quadratic coefficient in the 1-d minimization is not positive."""


class PreconditionError(WgsurfError):
    """A documented precondition of an operation does not hold."""


class ScenarioError(WgsurfError, ValueError):
    """A CLI scenario file is malformed."""
