"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid experiment or distribution configuration.

    Carries the full list of violations so a bad config fails once with
    every problem named, not one problem per run attempt.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ChainDivergenceError(RuntimeError):
    """A chain reached a non-finite state.

    ``last_records`` holds up to the last 10 per-step records before the
    abort, for post-mortem inspection.
    """

    def __init__(self, message, last_records=None):
        super().__init__(message)
        self.last_records = last_records or []
