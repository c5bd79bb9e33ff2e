"""Numerical verification toolkit for real hypersurfaces in products of complex space forms."""

__version__ = "0.1.0"

from .errors import DegeneracyError, DomainError, GeometryError, UsageError  # noqa: E402

__all__ = ["__version__", "GeometryError", "UsageError", "DomainError", "DegeneracyError"]
