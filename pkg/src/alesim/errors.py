"""Exception types shared across the package."""


class AleError(Exception):
    """Base class for package errors."""


class DomainError(AleError):
    """Evaluation requested outside the exterior disk |z| > 1."""


class SingularityError(AleError):
    """Evaluation hit a branch-singular point of a slit map."""


class ConfigError(AleError):
    """Invalid or inconsistent configuration."""
