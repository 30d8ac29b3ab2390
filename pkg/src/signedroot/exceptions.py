"""Exception taxonomy for the signedroot package.

Every error raised by this package derives from SignedRootError, so callers
can catch one type at the boundary. Input-side problems (bad arguments, data
outside the model support, parameters outside the domain) are distinguished
from numerical failures (singular systems, quadrature breakdown, fit
non-convergence) because the command line maps them to different exit codes.
"""


class SignedRootError(Exception):
    """Base class for all errors raised by signedroot."""


class InvalidInputError(SignedRootError):
    """Malformed argument: wrong shape, non-finite entry, bad option value."""


class DomainError(InvalidInputError):
    """Parameter point outside the model's open parameter domain."""


class DataError(InvalidInputError):
    """Observation outside the model support, or an unusable data file."""


class SingularMatrixError(SignedRootError):
    """Linear system is singular or too ill-conditioned to solve.

    Attributes
    ----------
    condition : float
        Estimated condition number (may be inf).
    """

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class QuadratureError(SignedRootError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best available value of the integral.
    error_estimate : float
        Estimated absolute error of ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error_estimate=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class BracketError(SignedRootError):
    """Root bracketing failed: no sign change on the searched interval."""


class FitError(SignedRootError):
    """Maximum likelihood fit did not converge.

    Attributes
    ----------
    trace : list
        Per-iteration (log-likelihood, gradient norm) pairs, when available.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class InconsistentFitError(SignedRootError):
    """Constrained fit exceeds the unconstrained maximum beyond tolerance."""


class CovarianceError(SignedRootError):
    """Covariance matrix required by a statistic is not usable (not PD)."""


class SingularityError(SignedRootError):
    """U/R is nonpositive away from the removable singularity at R = 0."""
