"""Exception hierarchy.

Validation errors map to CLI exit code 2, numerical-health errors to 3.
"""


class PureStatesError(Exception):
    pass


class ValidationError(PureStatesError, ValueError):
    """An input violates a documented invariant."""


class DimensionMismatchError(ValidationError):
    pass


class DomainError(ValidationError):
    """A scalar parameter lies outside its admissible range."""


class ResolutionError(ValidationError):
    """A grid is too coarse for the requested length scale."""


class NumericalHealthError(PureStatesError, RuntimeError):
    """A computation ran but its health metric is out of bounds."""


class AliasingError(NumericalHealthError):
    pass


class BoundarySpillError(NumericalHealthError):
    pass


class NormDriftError(NumericalHealthError):
    pass
