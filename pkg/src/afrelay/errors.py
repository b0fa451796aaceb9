"""Exception types shared across the package."""


class AfRelayError(Exception):
    """Base class for all package errors."""


class ConfigError(AfRelayError):
    """Invalid configuration value, key, or file."""


class DomainError(AfRelayError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ShapeError(AfRelayError, ValueError):
    """Array arguments have inconsistent shapes."""


class BracketError(AfRelayError):
    """Root-finding interval does not bracket a sign change."""


class ConvergenceError(AfRelayError):
    """An iterative solve ran out of iterations; carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleError(AfRelayError):
    """The power budget cannot be met by any admissible allocation."""


class UsageError(AfRelayError):
    """A solver was handed multipliers of the wrong kind for its constraint."""


class GuardError(AfRelayError):
    """A brute-force oracle was asked for a problem above its size guard."""
