"""Exception hierarchy shared by the geometry modules and the CLI."""


class GeometryError(Exception):
    """Base class for all errors raised by kahlerprod."""


class UsageError(GeometryError, ValueError):
    """Bad arguments: dimension mismatch, unknown suite, unparsable spec."""


class DomainError(GeometryError):
    """A point (or a finite-difference stencil around it) leaves the chart."""


class DegeneracyError(GeometryError):
    """Near-dependent vectors, rank-deficient Jacobians, zero-length inputs."""
