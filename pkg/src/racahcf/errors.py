"""Exception hierarchy shared by all modules."""


class RacahError(Exception):
    """Base class for library errors."""


class InvalidInputError(RacahError, ValueError):
    """Arguments violate a documented precondition."""


class UnsupportedError(RacahError):
    """The request is well formed but outside what the library implements."""


class ConsistencyError(RacahError):
    """An internal cross-check failed (for example a factorization residual)."""
