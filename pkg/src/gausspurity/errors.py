"""Exception hierarchy.

Every error raised by the library derives from :class:`GaussPurityError`.
The two intermediate classes decide the CLI exit status: validation
problems exit with 1, numerical failures with 2.
"""


class GaussPurityError(Exception):
    """Base class for all library errors."""


class ValidationError(GaussPurityError, ValueError):
    """Input is malformed or violates a documented precondition."""


class NumericalError(GaussPurityError, ArithmeticError):
    """A computation cannot proceed (singular matrix, unresolved grid...)."""


class DegenerateParams(NumericalError):
    """The quadratic form ``a*b - c**2`` is not positive."""


class SingularCM(NumericalError):
    """A covariance matrix has a (numerically) non-positive determinant."""


class NotPositiveDefinite(NumericalError):
    """An assembled multi-mode covariance matrix is not positive definite."""


class GridTooCoarse(NumericalError):
    """The vacuum calibration run of an oracle grid missed its tolerance."""


class BudgetExceeded(NumericalError):
    """A tensor grid would exceed the configured evaluation budget."""


class ModeMismatch(ValidationError):
    """Frequency bins do not pair up as the operation requires."""


class CorrelatedPairNotSupported(ValidationError):
    """The product purity law was requested for a correlated +/-Omega pair."""


class ConfigInvalid(ValidationError):
    """A simulation config is malformed."""


class BinAbsent(ValidationError):
    """A requested frequency bin is not in the ensemble."""


class ParseError(ValidationError):
    """A document could not be parsed."""


class InvariantViolation(ValidationError):
    """A loaded document violates an invariant of its in-memory type."""


class UnsupportedKind(ValidationError):
    """The document kind cannot be handled by the requested command."""
