"""Exception hierarchy shared by the geometry, billiard and orbit modules."""


class CurvebillError(Exception):
    """Base class for all library errors."""


class DomainError(CurvebillError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class CornerHit(CurvebillError):
    """A boundary query or a collision landed within tolerance of a corner."""


class GrazingReflection(CurvebillError):
    """The reflection angle is too close to 0 or pi for the map to be defined."""


class NoIntersection(CurvebillError):
    """The geodesic search ended without meeting the boundary."""
