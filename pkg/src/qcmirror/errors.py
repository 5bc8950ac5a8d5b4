"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed argument: wrong dimension, non-finite entries, bad parameter."""


class DomainError(ValueError):
    """Point lies outside the domain where an operation is defined."""


class OracleInconsistencyError(RuntimeError):
    """An oracle returned values that contradict its declared properties."""


class UnsupportedError(NotImplementedError):
    """Requested configuration is outside what the implementation covers."""


class ProblemFormatError(ValueError):
    """Problem file failed to parse or validate."""
