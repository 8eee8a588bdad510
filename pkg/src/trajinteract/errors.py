"""Exception types shared across the package."""


class TrajInteractError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TrajInteractError, ValueError):
    """Raised for non-finite, out-of-range or otherwise malformed inputs."""


class SchemaError(InvalidInputError):
    """Raised when a trajectory or lane file does not match its schema."""


class DegenerateGeometryError(InvalidInputError):
    """Raised when two agents are collocated and a distance ratio is undefined."""


class ConfigurationError(TrajInteractError, ValueError):
    """Raised when weights, shapes or config values are inconsistent."""


class InvariantViolation(TrajInteractError, RuntimeError):
    """Raised when an internal invariant check fails."""
