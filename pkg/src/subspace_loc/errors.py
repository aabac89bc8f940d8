"""Exception types raised across the package."""


class SubspaceLocError(Exception):
    """Base class for all errors raised by subspace_loc."""


class DomainError(SubspaceLocError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(SubspaceLocError, ValueError):
    """Inputs are individually valid but violate an estimator requirement."""


class SingularityError(SubspaceLocError, ArithmeticError):
    """A matrix that must be invertible is (numerically) rank deficient."""


class ConfigError(SubspaceLocError, ValueError):
    """Invalid scenario configuration.

    ``field`` names the offending config entry (dotted path) when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.message = message
        self.field = field
