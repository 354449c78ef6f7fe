"""Exception hierarchy shared by all modules."""


class BandUnitaryError(Exception):
    """Base class for library errors."""


class ConfigurationError(BandUnitaryError, ValueError):
    """Invalid model parameters or distribution specification."""


class UsageError(BandUnitaryError, ValueError):
    """Arguments inconsistent with an operation's preconditions."""


class DomainError(BandUnitaryError, ValueError):
    """Argument outside the mathematical domain of a function."""


class NumericError(BandUnitaryError, ArithmeticError):
    """A numerical routine failed a built-in consistency check."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
