"""Exception types shared across the package.

ValidationError covers rejected inputs (bad intervals, out-of-range
parameters); NumericalError covers failures of a numerical procedure on
input that passed validation (breakdowns, singular systems).
"""


class ValidationError(ValueError):
    """Input rejected before any computation was attempted."""


class NumericalError(RuntimeError):
    """A numerical procedure failed or lost too much accuracy."""
