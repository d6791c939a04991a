"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NormalizationError(ValueError):
    """A density failed to integrate to one within tolerance."""


class InsufficientDataError(ValueError):
    """Too few samples for a statistical estimate."""


class ConvergenceError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best available estimate and its error bound are kept so callers
    can decide whether to use it anyway.
    """

    def __init__(self, message: str, best_estimate: float, error_bound: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` is the dotted key path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
