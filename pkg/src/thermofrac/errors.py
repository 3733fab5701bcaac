"""Exception hierarchy shared across the package."""


class ThermofracError(Exception):
    """Base class for all errors raised by this package."""


class MeshError(ThermofracError):
    """Invalid mesh data or impossible generator parameters."""


class MeshParseError(MeshError):
    """Malformed mesh file. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(ThermofracError):
    """Invalid run configuration. Message names the offending key path."""


class ConstraintError(ThermofracError):
    """Conflicting or unknown Dirichlet constraints."""


class SolveError(ThermofracError):
    """Linear solve failed (singular system or residual out of tolerance)."""
