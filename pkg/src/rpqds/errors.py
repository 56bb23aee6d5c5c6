"""Exception types shared across the package."""


class RpqdsError(Exception):
    """Base class for all package errors."""


class DomainError(RpqdsError, ValueError):
    """An argument lies outside its mathematical domain."""


class InfeasibleError(RpqdsError):
    """A protocol setting cannot meet its security target.

    ``constraint`` names the binding condition (e.g. ``"threshold-gap"``,
    ``"forgery-floor"``, ``"pulse-budget"``) so callers and the CLI can
    report *why* a scan point failed rather than just that it failed.
    """

    def __init__(self, message, constraint="infeasible"):
        super().__init__(message)
        self.constraint = constraint


class NoDataError(RpqdsError):
    """A channel produced no sifted bits at the requested setting."""


class ConvergenceError(RpqdsError):
    """A root finder or search failed to converge."""
