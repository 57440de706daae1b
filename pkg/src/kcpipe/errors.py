"""Exception types shared across the pipeline."""


class ValidationError(ValueError):
    """Input violates a documented precondition (bad label, shape mismatch, ...)."""


class DegenerateInputError(ValueError):
    """Statistically degenerate input (e.g. zero-variance differences)."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite or otherwise invalid value."""
