"""Exception hierarchy shared by all carnotmv modules."""


class CarnotError(Exception):
    """Base class for all carnotmv errors."""


class DomainError(CarnotError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionMismatchError(CarnotError, ValueError):
    """Coordinates do not conform to the stratification they are used with."""


class UnsupportedModelError(CarnotError, ValueError):
    """The requested operation is not available for this group model."""


class DegenerateGradientError(DomainError):
    """Horizontal gradient vanishes where a nonzero one is required."""


class FeasibilityError(CarnotError, RuntimeError):
    """Rejection sampling cannot produce samples at a workable acceptance rate."""


class UnderResolvedBallError(DomainError):
    """Grid spacing is too coarse to resolve the requested pseudoball."""
