"""Exception types shared across the package.

The CLI maps each of these onto a dedicated exit code, so synthesis and
simulation code should raise the most specific type that applies rather
than a bare ValueError.
"""


class ConfigError(ValueError):
    """An experiment description is malformed or violates a field invariant."""


class AssumptionError(ValueError):
    """A model fails a synthesis precondition.

    Raised when a cost matrix is not positive definite, a pair (A, B) is
    not controllable, or a pair (A, C) is not observable. The message
    names the failing condition.
    """


class ConvergenceError(RuntimeError):
    """A fixed-point Riccati iteration did not converge.

    Carries the iteration count and the last residual so callers can
    report how far the solve got.
    """

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class InapplicableBoundError(ValueError):
    """The closed-form covariance cap does not apply to this model.

    Carries the (negative) margin of the spectral condition so reports
    can state how badly it failed.
    """

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin
