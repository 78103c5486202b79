"""Exception types shared across the package."""


class CatbaryError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CatbaryError, ValueError):
    """Malformed or inconsistent inputs (mismatched kinds, bad ranges, ...)."""


class NumericDomainError(CatbaryError):
    """An inverse-trig argument violated its domain beyond the clamp tolerance."""


class NoUniqueGeodesicError(CatbaryError):
    """Endpoints at distance >= D_k on a positively curved model space."""


class InfeasibleTriangleError(InvalidInputError):
    """Side lengths violate the triangle inequality or the 2*D_k perimeter cap."""


class DiameterBoundError(InvalidInputError):
    """Point set diameter exceeds the bound required for a unique barycenter."""


class ConvexityViolationError(CatbaryError):
    """A geodesic between member points left a subset space."""


class UnsupportedSpaceError(CatbaryError):
    """Operation not available for this space type."""


class HypothesisViolationError(InvalidInputError):
    """A check was invoked on data violating the theorem's hypotheses."""


class UncoveredPointError(CatbaryError):
    """Query point lies outside every cover member (and outside the collar)."""


class NotApplicableError(CatbaryError):
    """Partition weights requested for a point already in the target set."""


class InsufficientCoverError(CatbaryError):
    """Cover construction left validation points uncovered outside the collar."""
