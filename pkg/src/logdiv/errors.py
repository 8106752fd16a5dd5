"""Exception hierarchy.

Every error raised by the library derives from :class:`LogDivError` so callers
(and the command line front end) can map failures to exit codes.
"""


class LogDivError(Exception):
    """Base class for all library errors."""


class DomainError(LogDivError, ValueError):
    """A point lies outside the domain of the function being evaluated."""


class ParameterError(LogDivError, ValueError):
    """An invalid parameter value (alpha, concentration, dimension, ...)."""


class SingularTransformError(LogDivError, ArithmeticError):
    """The denominator ``1 - alpha * Dphi(theta) . theta`` vanishes."""


class ConvergenceError(LogDivError, RuntimeError):
    """An iterative solver did not reach its tolerance.

    Attributes
    ----------
    residual : float
        Final residual (or gradient norm) of the solver.
    result : object
        Best-effort result, when one is available.
    """

    def __init__(self, message, residual=float("nan"), result=None):
        super().__init__(message)
        self.residual = residual
        self.result = result


class BoundaryError(ConvergenceError):
    """The minimizing sequence runs into the boundary of the domain."""


class DegenerateMetricError(LogDivError, ArithmeticError):
    """``Pi = 1 + alpha * theta . eta`` is not positive."""


class FrameError(LogDivError, ValueError):
    """Tangent vectors are expressed in the wrong coordinate frame."""


class RankError(LogDivError, ValueError):
    """A basis matrix does not have full column rank."""


class GeometryError(LogDivError, ArithmeticError):
    """A computed geometric object violates its defining property."""


class PreconditionError(LogDivError, ValueError):
    """An operation precondition does not hold."""


class InputError(LogDivError, ValueError):
    """Malformed input file or configuration."""
