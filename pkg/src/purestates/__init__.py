"""Executable theory of pure and mixed states at finite dimension."""

from purestates.errors import (
    AliasingError,
    BoundarySpillError,
    DimensionMismatchError,
    DomainError,
    NormDriftError,
    NumericalHealthError,
    PureStatesError,
    ResolutionError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "BoundarySpillError",
    "DimensionMismatchError",
    "DomainError",
    "NormDriftError",
    "NumericalHealthError",
    "PureStatesError",
    "ResolutionError",
    "ValidationError",
]
