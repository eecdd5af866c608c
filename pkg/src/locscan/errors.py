"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class ScopeError(InputError):
    """Raised when a request falls outside the range where a result is defined."""
