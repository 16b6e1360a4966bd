"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class InfeasibleError(ValueError):
    """No parameter value satisfies the requested privacy target."""


class ValidityError(ValueError):
    """A protocol is used outside the parameter range its guarantee covers."""


class DegenerateConfigError(ValueError):
    """The configuration makes the estimator undefined (e.g. zero sampling rate)."""


class IntegrityError(RuntimeError):
    """A decrypted message does not decode to a valid item."""


class IngestionError(ValueError):
    """A dataset file could not be parsed.

    Attributes:
        line: 1-based line number of the offending record, or None when the
            problem concerns the file as a whole.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
