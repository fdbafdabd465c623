"""Geometry of the three constant-curvature model surfaces.

Points are stored in embedding coordinates:

* ``E2``: the plane, ``(x, y)``.
* ``S2``: the unit sphere in Euclidean 3-space, ``(x, y, z)``.
* ``H2``: the upper sheet of the hyperboloid ``-x0**2 + x1**2 + x2**2 = -1``
  in Minkowski 3-space, ``(x0, x1, x2)`` with ``x0 > 0``.

Every geodesic through ``p`` with unit tangent ``v`` is
``C(t) * p + S(t) * v`` where ``(C, S)`` is ``(1, t)``, ``(cos, sin)`` or
``(cosh, sinh)``.  The module-level array functions below work on stacks of
points (last axis = coordinates) and are what the rest of the package uses;
the dataclasses and the scalar operations at the bottom are the public face.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Tolerances used when validating user-constructed values.
EMBED_TOL = 1e-9
BASE_TOL = 1e-9


class Curvature(enum.IntEnum):
    HYPERBOLIC = -1
    EUCLIDEAN = 0
    SPHERICAL = 1

    @classmethod
    def coerce(cls, kappa) -> "Curvature":
        """Accept an int, a Curvature or one of the names ``E2``, ``S2``, ``H2``."""
        if isinstance(kappa, str):
            key = kappa.strip().upper()
            names = {"E2": cls.EUCLIDEAN, "S2": cls.SPHERICAL, "H2": cls.HYPERBOLIC}
            if key in names:
                return names[key]
            try:
                return cls[key]
            except KeyError:
                kappa = key
        try:
            return cls(int(kappa))
        except (TypeError, ValueError):
            raise DomainError(f"curvature must be -1, 0 or +1, got {kappa!r}") from None

    @property
    def label(self) -> str:
        return {-1: "H2", 0: "E2", 1: "S2"}[int(self)]

    @property
    def dim(self) -> int:
        return 2 if self == Curvature.EUCLIDEAN else 3


# ---------------------------------------------------------------------------
# vectorized kernel

def origin(kappa) -> np.ndarray:
    """The base point used as the center of polar coordinates."""
    kappa = Curvature(kappa)
    if kappa == Curvature.EUCLIDEAN:
        return np.zeros(2)
    if kappa == Curvature.SPHERICAL:
        return np.array([0.0, 0.0, 1.0])
    return np.array([1.0, 0.0, 0.0])


def frame(kappa) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal, positively oriented tangent basis ``(e1, e2)`` at :func:`origin`."""
    kappa = Curvature(kappa)
    if kappa == Curvature.EUCLIDEAN:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    if kappa == Curvature.SPHERICAL:
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    return np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])


def inner(kappa, a, b):
    """Ambient inner product along the last axis (Minkowski on H2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    prod = a * b
    if kappa == Curvature.HYPERBOLIC:
        return prod[..., 1] + prod[..., 2] - prod[..., 0]
    return prod.sum(axis=-1)


def cs(kappa, t):
    """Return ``(C(t), S(t))``, the coefficient functions of the geodesic."""
    t = np.asarray(t, dtype=float)
    if kappa == Curvature.EUCLIDEAN:
        return np.ones_like(t), t
    if kappa == Curvature.SPHERICAL:
        return np.cos(t), np.sin(t)
    return np.cosh(t), np.sinh(t)


def flow(kappa, p, v, t):
    """Point and velocity at arclength ``t`` along the geodesic ``(p, v)``.

    ``t`` broadcasts against the leading axes of ``p`` and ``v``.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    c, s = cs(kappa, t)
    c = c[..., None]
    s = s[..., None]
    q = c * p + s * v
    if kappa == Curvature.EUCLIDEAN:
        return q, np.broadcast_to(v, q.shape).copy()
    # d/dt C = -kappa S, d/dt S = C
    w = -float(kappa) * s * p + c * v
    return q, w


def normalize_point(kappa, p):
    p = np.asarray(p, dtype=float)
    if kappa == Curvature.EUCLIDEAN:
        return p.copy()
    if kappa == Curvature.SPHERICAL:
        return p / np.linalg.norm(p, axis=-1, keepdims=True)
    q = p.copy()
    q[..., 0] = np.abs(q[..., 0])
    return q / np.sqrt(-inner(kappa, q, q))[..., None]


def project_tangent(kappa, p, v):
    """Orthogonal projection of ``v`` onto the tangent space at ``p``."""
    v = np.asarray(v, dtype=float)
    if kappa == Curvature.EUCLIDEAN:
        return v.copy()
    p = np.asarray(p, dtype=float)
    # <p, p> = +1 on S2 and -1 on H2
    return v - (inner(kappa, v, p) * float(kappa))[..., None] * p


def normalize_tangent(kappa, p, v):
    v = project_tangent(kappa, p, v)
    return v / np.sqrt(inner(kappa, v, v))[..., None]


def left_normal(kappa, p, t):
    """Rotate the tangent ``t`` at ``p`` by +90 degrees within the tangent plane."""
    t = np.asarray(t, dtype=float)
    if kappa == Curvature.EUCLIDEAN:
        return np.stack([-t[..., 1], t[..., 0]], axis=-1)
    n = np.cross(np.asarray(p, dtype=float), t)
    if kappa == Curvature.HYPERBOLIC:
        n = n * np.array([-1.0, 1.0, 1.0])
    return n


def dist(kappa, p, q):
    """Geodesic distance between stacks of points.

    Uses chord-length forms that stay accurate for nearby points; they agree
    with ``arccos(<p, q>)`` and ``arccosh(-<p, q>)`` wherever those are well
    conditioned.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    if kappa == Curvature.EUCLIDEAN:
        return np.linalg.norm(d, axis=-1)
    if kappa == Curvature.SPHERICAL:
        cross = np.linalg.norm(np.cross(p, q), axis=-1)
        return np.arctan2(cross, (p * q).sum(axis=-1))
    chord2 = np.maximum(inner(kappa, d, d), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(chord2))


def direction_to(kappa, p, q):
    """Unit initial velocity of the geodesic from ``p`` to ``q``, and the distance.

    On S2 the pair must not be antipodal.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = dist(kappa, p, q)
    if kappa == Curvature.EUCLIDEAN:
        u = q - p
    else:
        u = project_tangent(kappa, p, q)
    u = u / np.sqrt(inner(kappa, u, u))[..., None]
    return u, d


def polar_point(kappa, rho, theta):
    """Point at geodesic distance ``rho`` from :func:`origin` in direction ``theta``."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c, s = cs(kappa, rho)
    e1, e2 = frame(kappa)
    u = np.cos(theta)[..., None] * e1 + np.sin(theta)[..., None] * e2
    return c[..., None] * origin(kappa) + s[..., None] * u


def polar_coords(kappa, p):
    """Inverse of :func:`polar_point`: ``(rho, theta)`` with ``theta`` in (-pi, pi]."""
    p = np.asarray(p, dtype=float)
    if kappa == Curvature.EUCLIDEAN:
        a, b = p[..., 0], p[..., 1]
        return np.hypot(a, b), np.arctan2(b, a)
    if kappa == Curvature.SPHERICAL:
        a, b = p[..., 0], p[..., 1]
        return np.arctan2(np.hypot(a, b), p[..., 2]), np.arctan2(b, a)
    a, b = p[..., 1], p[..., 2]
    return np.arcsinh(np.hypot(a, b)), np.arctan2(b, a)


# ---------------------------------------------------------------------------
# value types

@dataclass(frozen=True)
class SurfacePoint:
    """A point on one of the model surfaces, in embedding coordinates."""

    coords: tuple
    kappa: Curvature

    def __post_init__(self):
        kappa = Curvature.coerce(self.kappa)
        arr = np.asarray(self.coords, dtype=float)
        if arr.shape != (kappa.dim,):
            raise DomainError(f"{kappa.label} points need {kappa.dim} coordinates")
        if kappa == Curvature.SPHERICAL and abs(np.linalg.norm(arr) - 1.0) > EMBED_TOL:
            raise DomainError("point is not on the unit sphere")
        if kappa == Curvature.HYPERBOLIC and (
            abs(inner(kappa, arr, arr) + 1.0) > EMBED_TOL or arr[0] <= 0
        ):
            raise DomainError("point is not on the upper hyperboloid sheet")
        arr = normalize_point(kappa, arr)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "coords", tuple(float(x) for x in arr))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)


@dataclass(frozen=True)
class UnitTangent:
    """A unit tangent vector ``dir`` attached to ``base``."""

    base: SurfacePoint
    dir: tuple

    def __post_init__(self):
        kappa = self.base.kappa
        p = self.base.array
        v = np.asarray(self.dir, dtype=float)
        if v.shape != p.shape:
            raise DomainError("tangent and base point dimensions differ")
        if kappa != Curvature.EUCLIDEAN and abs(inner(kappa, v, p)) > EMBED_TOL:
            raise DomainError("direction is not tangent at the base point")
        if abs(inner(kappa, v, v) - 1.0) > EMBED_TOL:
            raise DomainError("direction is not a unit vector")
        v = normalize_tangent(kappa, p, v)
        object.__setattr__(self, "dir", tuple(float(x) for x in v))

    @property
    def kappa(self) -> Curvature:
        return self.base.kappa

    @property
    def array(self) -> np.ndarray:
        return np.array(self.dir)

    @classmethod
    def from_arrays(cls, kappa, p, v) -> "UnitTangent":
        """Build from raw arrays, renormalizing both point and direction."""
        kappa = Curvature.coerce(kappa)
        p = normalize_point(kappa, p)
        v = normalize_tangent(kappa, p, v)
        return cls(SurfacePoint(tuple(p), kappa), tuple(v))


# ---------------------------------------------------------------------------
# scalar operations

def geodesic_flow(start: UnitTangent, tau: float) -> UnitTangent:
    """Follow the geodesic defined by ``start`` for arclength ``tau``.

    Returns the endpoint together with the parallel-transported velocity.
    """
    kappa = start.kappa
    q, w = flow(kappa, start.base.array, start.array, tau)
    return UnitTangent.from_arrays(kappa, q, w)


def distance(p: SurfacePoint, q: SurfacePoint) -> float:
    if p.kappa != q.kappa:
        raise DomainError("points live on different surfaces")
    return float(dist(p.kappa, p.array, q.array))


def angle_between(u: UnitTangent, v: UnitTangent) -> float:
    """Angle in [0, pi] between two unit tangents at the same base point."""
    if u.kappa != v.kappa:
        raise DomainError("tangents live on different surfaces")
    if np.max(np.abs(u.base.array - v.base.array)) > BASE_TOL:
        raise DomainError("tangents are attached to different base points")
    c = float(inner(u.kappa, u.array, v.array))
    return math.acos(min(1.0, max(-1.0, c)))


def law_of_cosines_side(x: float, z: float, theta: float, kappa) -> float:
    """Side opposite the included angle ``theta`` between sides ``x`` and ``z``."""
    kappa = Curvature.coerce(kappa)
    if not (x > 0 and z > 0):
        raise DomainError("sides must be positive")
    if not (0 < theta < math.pi):
        raise DomainError("included angle must lie in (0, pi)")
    if kappa == Curvature.EUCLIDEAN:
        return math.sqrt(max(0.0, x * x + z * z - 2 * x * z * math.cos(theta)))
    if kappa == Curvature.SPHERICAL:
        if not (x < math.pi and z < math.pi):
            raise DomainError("spherical sides must be shorter than pi")
        c = math.cos(x) * math.cos(z) + math.sin(x) * math.sin(z) * math.cos(theta)
        return math.acos(min(1.0, max(-1.0, c)))
    c = math.cosh(x) * math.cosh(z) - math.sinh(x) * math.sinh(z) * math.cos(theta)
    return math.acosh(max(1.0, c))
