"""Exception hierarchy shared by all sicprop modules."""


class SicpropError(Exception):
    """Base class for library errors."""


class CapacityError(SicpropError):
    """A construction would exceed the configured maximum dimension."""


class ContractError(SicpropError, ValueError):
    """An input violates a documented precondition."""


class CausticError(SicpropError):
    """A kernel was requested at (or too near) a caustic time."""

    def __init__(self, message: str, n: int | None = None):
        super().__init__(message)
        self.n = n


class AccuracyError(SicpropError):
    """A numerical procedure failed to reach its requested accuracy."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class ResolutionError(SicpropError):
    """A lattice is too coarse for the requested operator."""
