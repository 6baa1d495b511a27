"""Exception types shared across the package."""


class LevyRecError(Exception):
    """Base class."""


class ModelError(LevyRecError):
    """A process description violates a triplet or family invariant."""


class UnsupportedModelError(LevyRecError):
    """The requested envelope or analysis cannot be computed for this family."""


class QuadratureError(LevyRecError):
    """Numerical integration failed; ``partial`` holds the value reached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TruncationError(LevyRecError):
    """A series did not reach its truncation bound within the iteration cap."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FitError(LevyRecError):
    """Asymptotic fit could not be formed (non-positive samples, short grid)."""


class ConfigError(LevyRecError):
    """Malformed run configuration."""
