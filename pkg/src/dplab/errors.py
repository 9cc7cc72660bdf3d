"""Exception types shared across the package."""


class DplabError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(DplabError, ValueError):
    """A distribution or process parameter is outside its valid domain."""


class PartitionError(DplabError, ValueError):
    """The supplied cells do not form a measurable partition of the support."""


class TruncationError(DplabError, ValueError):
    """The truncation policy can never terminate stick generation."""


class ArgumentError(DplabError, ValueError):
    """An operation argument is outside its documented domain."""


class SingularDensityError(DplabError, ArithmeticError):
    """The base density vanishes at a quantile where it must be positive."""


class ConfigError(DplabError, ValueError):
    """An experiment configuration failed validation.

    ``path`` locates the offending field, e.g. ``"truncation.epsilon"``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
