"""Exception types shared across the package."""


class GeoslideError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDirectionError(GeoslideError, ValueError):
    """A direction vector with (near-)zero norm was passed where a
    well-defined direction is required."""


class FreeFallSingularityError(DegenerateDirectionError):
    """The commanded specific force vanished: thrust direction is undefined."""


class IntegrationBlowupError(GeoslideError, RuntimeError):
    """Integration produced a non-finite state.  Carries the simulation time."""

    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"non-finite state at t={time:.6f} s")


class TrajectoryDomainError(GeoslideError, ValueError):
    """A trajectory was sampled outside its time domain."""


class ConfigError(GeoslideError, ValueError):
    """An experiment configuration failed validation."""
