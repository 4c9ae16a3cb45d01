"""Exception types shared across the package."""

__all__ = ["DomainError", "ConvergenceError", "ConsistencyError",
           "EstimationError", "TrackError", "ConfigError", "StepError"]


class DomainError(ValueError):
    """A function was evaluated outside its mathematical domain."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance.

    Carries the iteration count and the residual history so callers can
    inspect how the iteration behaved.
    """

    def __init__(self, message, iterations=None, residuals=None):
        super().__init__(message)
        self.iterations = iterations
        self.residuals = list(residuals) if residuals is not None else []


class ConsistencyError(ValueError):
    """A coefficient table violates a structural requirement."""


class EstimationError(RuntimeError):
    """A statistical fit is degenerate or under-sampled."""


class TrackError(LookupError):
    """A requested functional was not tracked during integration."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class StepError(RuntimeError):
    """A stepper failed; carries the step index when raised inside a run."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
