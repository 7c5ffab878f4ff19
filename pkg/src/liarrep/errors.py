"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ReputationError(ValueError):
    """Base class for all library errors."""


class OutOfRange(ReputationError):
    def __init__(self, field: str, value, bound: str):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} out of range (expected {bound})")


class NonFinite(ReputationError):
    def __init__(self, field: str, value):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} is not a finite number")


class DegenerateState(ReputationError):
    """alpha + beta == 0, reputation undefined."""


class DegenerateDenominator(ReputationError):
    pass


class InvalidScale(ReputationError):
    pass


class ChatterDetected(ReputationError):
    """Too many switching-line crossings in the piecewise ODE solver."""


class OverlappingTargets(ReputationError):
    pass


class BurnInTooLarge(ReputationError):
    pass
