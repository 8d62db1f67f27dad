"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition or invariant."""


class NumericsError(RuntimeError):
    """Raised when a numerical routine fails to meet its accuracy contract."""
