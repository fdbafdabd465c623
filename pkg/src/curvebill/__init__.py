"""Billiards on the Euclidean plane, the unit sphere and the hyperbolic plane.

Geometry kernel, billiard map, Jacobi-field derivatives, 3-period orbit
search, and Monte Carlo measure estimates for tables on surfaces of
constant curvature.
"""

__version__ = "0.1.0"

from .billiard import (
    Orbit,
    PhasePoint,
    d3_finite_difference,
    d3_jacobi,
    iterate,
    next_collision,
)
from .boundary import BoundaryCurve, make_family
from .errors import (
    CornerHit,
    CurvebillError,
    DomainError,
    GrazingReflection,
    NoIntersection,
)
from .jacobi import evolution, f_of_l, reflection, three_bounce_product
from .measure import invariance_test, periodic_fraction, sample_mu, scaling_study
from .periodic import (
    Classification,
    classify_theorem2,
    compatibility_report,
    find_3period,
    grad_perimeter,
    perimeter,
)
from .surface import (
    Curvature,
    SurfacePoint,
    UnitTangent,
    angle_between,
    distance,
    geodesic_flow,
    law_of_cosines_side,
)

__all__ = [
    "BoundaryCurve",
    "Classification",
    "CornerHit",
    "Curvature",
    "CurvebillError",
    "DomainError",
    "GrazingReflection",
    "NoIntersection",
    "Orbit",
    "PhasePoint",
    "SurfacePoint",
    "UnitTangent",
    "angle_between",
    "classify_theorem2",
    "compatibility_report",
    "d3_finite_difference",
    "d3_jacobi",
    "distance",
    "evolution",
    "f_of_l",
    "find_3period",
    "geodesic_flow",
    "grad_perimeter",
    "invariance_test",
    "iterate",
    "law_of_cosines_side",
    "make_family",
    "next_collision",
    "perimeter",
    "periodic_fraction",
    "reflection",
    "sample_mu",
    "scaling_study",
    "three_bounce_product",
]
