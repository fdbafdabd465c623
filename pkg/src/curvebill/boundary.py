"""Closed billiard boundaries parametrized by arclength.

A :class:`BoundaryCurve` is a chain of smooth pieces, each a map from
``t in [0, 1]`` to the surface with analytic first and second derivatives.
Arclength along a piece is tabulated once at construction (piecewise
Chebyshev interpolation of the speed, integrated exactly) and inverted with
a few Newton steps, so ``point_at`` is cheap and accurate to ~1e-14.

The boundary is traversed counterclockwise: the table lies to the left of
the tangent, and the geodesic curvature of a convex table is positive.

Two concrete table types are provided:

* :class:`PolarTable` - a curve ``rho = R(theta)`` in geodesic polar
  coordinates around the model origin (geodesic circles, Fourier
  perturbations of them, Euclidean ellipses, the hemisphere).
* :class:`GeodesicPolygon` - a convex spherical polygon made of great-circle
  arcs (the octant).

Self-intersection of user-supplied curves is not detected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev

from . import surface as sf
from .errors import CornerHit, DomainError
from .surface import Curvature, SurfacePoint, UnitTangent

CORNER_TOL = 1e-7

_PANELS = 32
_CHEB_DEGREE = 24
_NEWTON_STEPS = 3


# ---------------------------------------------------------------------------
# radial profiles for polar tables

class ConstantRadius:
    def __init__(self, r):
        self.r = float(r)

    def __call__(self, theta, order=0):
        theta = np.asarray(theta, dtype=float)
        if order == 0:
            return np.full_like(theta, self.r)
        return np.zeros_like(theta)


class FourierRadius:
    """``R(theta) = r * (1 + sum_k a_k cos(k theta))`` with mode ``k = index + 1``."""

    def __init__(self, r, amplitudes):
        self.r = float(r)
        self.amplitudes = [float(a) for a in amplitudes]
        self._k = np.arange(1, len(self.amplitudes) + 1, dtype=float)
        self._a = np.asarray(self.amplitudes, dtype=float)

    def __call__(self, theta, order=0):
        theta = np.asarray(theta, dtype=float)
        if not len(self._a):
            return ConstantRadius(self.r)(theta, order)
        kt = theta[..., None] * self._k
        if order == 0:
            return self.r * (1.0 + (self._a * np.cos(kt)).sum(axis=-1))
        if order == 1:
            return -self.r * (self._k * self._a * np.sin(kt)).sum(axis=-1)
        return -self.r * (self._k**2 * self._a * np.cos(kt)).sum(axis=-1)


class EllipseRadius:
    """Polar radius of the centered ellipse ``x**2/a**2 + y**2/b**2 = 1``."""

    def __init__(self, a, b):
        self.a = float(a)
        self.b = float(b)

    def __call__(self, theta, order=0):
        theta = np.asarray(theta, dtype=float)
        a, b = self.a, self.b
        d = b * b + (a * a - b * b) * np.sin(theta) ** 2
        if order == 0:
            return a * b / np.sqrt(d)
        d1 = (a * a - b * b) * np.sin(2 * theta)
        if order == 1:
            return -0.5 * a * b * d**-1.5 * d1
        d2 = 2 * (a * a - b * b) * np.cos(2 * theta)
        return a * b * (0.75 * d**-2.5 * d1**2 - 0.5 * d**-1.5 * d2)


# ---------------------------------------------------------------------------
# smooth pieces

class PolarPiece:
    """The closed curve ``rho = R(theta)``, ``theta = 2 pi t``."""

    is_geodesic_arc = False

    def __init__(self, kappa, radius):
        self.kappa = Curvature(kappa)
        self.radius = radius
        self._o = sf.origin(self.kappa)
        self._e1, self._e2 = sf.frame(self.kappa)

    def _parts(self, t):
        theta = 2 * math.pi * np.asarray(t, dtype=float)
        rho = self.radius(theta)
        c, s = sf.cs(self.kappa, rho)
        cos, sin = np.cos(theta)[..., None], np.sin(theta)[..., None]
        u = cos * self._e1 + sin * self._e2
        du = -sin * self._e1 + cos * self._e2
        return theta, rho, c[..., None], s[..., None], u, du

    def position(self, t):
        _, _, c, s, u, _ = self._parts(t)
        return c * self._o + s * u

    @property
    def uniform_speed(self):
        return isinstance(self.radius, ConstantRadius)

    def velocity(self, t):
        theta, _, c, s, u, du = self._parts(t)
        r1 = self.radius(theta, 1)[..., None]
        d_rho = -float(self.kappa) * s * self._o + c * u
        return 2 * math.pi * (r1 * d_rho + s * du)

    def derivatives(self, t):
        """First and second derivatives with respect to ``t``."""
        theta, _, c, s, u, du = self._parts(t)
        k = float(self.kappa)
        r1 = self.radius(theta, 1)[..., None]
        r2 = self.radius(theta, 2)[..., None]
        # C' = -k S, S' = C, C'' = -k C, S'' = -k S
        d_rho = -k * s * self._o + c * u
        d_rho2 = -k * (c * self._o + s * u)
        p1 = r1 * d_rho + s * du
        p2 = r2 * d_rho + r1**2 * d_rho2 + 2 * r1 * c * du - s * u
        w = 2 * math.pi
        return w * p1, w * w * p2


class GeodesicArcPiece:
    """Geodesic segment of the given length starting at ``p`` with direction ``v``."""

    is_geodesic_arc = True
    uniform_speed = True

    def __init__(self, kappa, p, v, length):
        self.kappa = Curvature(kappa)
        self.p = np.asarray(p, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.length = float(length)

    def position(self, t):
        q, _ = sf.flow(self.kappa, self.p, self.v, self.length * np.asarray(t, dtype=float))
        return q

    def velocity(self, t):
        return self.derivatives(t)[0]

    def derivatives(self, t):
        tau = self.length * np.asarray(t, dtype=float)
        c, s = sf.cs(self.kappa, tau)
        c, s = c[..., None], s[..., None]
        k = float(self.kappa)
        d1 = -k * s * self.p + c * self.v
        d2 = -k * (c * self.p + s * self.v)
        return self.length * d1, self.length**2 * d2


# ---------------------------------------------------------------------------
# arclength tables

def _clenshaw_rows(x, coef):
    """Evaluate one Chebyshev series per row: ``coef`` has shape (N, m)."""
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for j in range(coef.shape[1] - 1, 0, -1):
        b1, b2 = 2 * x * b1 - b2 + coef[:, j], b1
    return x * b1 - b2 + coef[:, 0]


class ArclengthTable:
    """Cumulative arclength ``s(t)`` of a piece and its inverse."""

    def __init__(self, piece, panels=_PANELS, degree=_CHEB_DEGREE):
        self.piece = piece
        self.panels = panels
        nodes = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
        half = 0.5 / panels
        coefs = []
        cum = [0.0]
        for j in range(panels):
            t = (j + 0.5) / panels + half * nodes
            c = chebyshev.chebfit(nodes, self.speed(t), degree)
            ic = chebyshev.chebint(c, lbnd=-1) * half
            coefs.append(ic)
            cum.append(cum[-1] + chebyshev.chebval(1.0, ic))
        self._coef = np.array(coefs)
        self._cum = np.array(cum)
        self.length = float(self._cum[-1])
        grid = np.linspace(0.0, 1.0, panels * 8 + 1)
        self._grid_t = grid
        self._grid_s = self.s_of_t(grid)

    def speed(self, t):
        d1 = self.piece.velocity(t)
        return np.sqrt(sf.inner(self.piece.kappa, d1, d1))

    def s_of_t(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        idx = np.clip(np.floor(flat * self.panels).astype(int), 0, self.panels - 1)
        x = 2.0 * (flat * self.panels - idx) - 1.0
        out = self._cum[idx] + _clenshaw_rows(x, self._coef[idx])
        return out.reshape(t.shape)

    def t_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.piece.uniform_speed:
            return np.clip(s / self.length, 0.0, 1.0)
        t = np.interp(s, self._grid_s, self._grid_t)
        for _ in range(_NEWTON_STEPS):
            t = t - (self.s_of_t(t) - s) / self.speed(t)
        return np.clip(t, 0.0, 1.0)


# ---------------------------------------------------------------------------
# boundary curves

class BoundaryCurve:
    """Closed piecewise-smooth boundary, counterclockwise around the table.

    Subclasses supply :meth:`level` (negative inside the table, positive
    outside, zero on the boundary) and :meth:`locate` (arclength of a
    boundary point); the billiard map is built on those two.
    """

    def __init__(self, kappa, pieces, descriptor=None, corner_tol=CORNER_TOL):
        self.kappa = Curvature.coerce(kappa)
        self.pieces = list(pieces)
        self.descriptor = dict(descriptor or {})
        self.corner_tol = float(corner_tol)
        self._tables = [ArclengthTable(p) for p in self.pieces]
        lengths = [tab.length for tab in self._tables]
        self._starts = np.concatenate([[0.0], np.cumsum(lengths)])
        self.total_length = float(self._starts[-1])
        corners = []
        for j in range(len(self.pieces)):
            prev = self.pieces[j - 1]
            if len(self.pieces) == 1:
                break
            d_prev, _ = prev.derivatives(1.0)
            d_next, _ = self.pieces[j].derivatives(0.0)
            cosang = sf.inner(self.kappa, d_prev, d_next) / np.sqrt(
                sf.inner(self.kappa, d_prev, d_prev) * sf.inner(self.kappa, d_next, d_next)
            )
            if cosang < 1 - 1e-12:
                corners.append(float(self._starts[j]))
        self.corners = tuple(corners)

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor or self.kappa.label})"

    @property
    def name(self) -> str:
        return self.descriptor.get("family", type(self).__name__)

    # -- array interface -------------------------------------------------

    def _split(self, s):
        s = np.mod(np.asarray(s, dtype=float), self.total_length)
        idx = np.clip(np.searchsorted(self._starts, s, side="right") - 1, 0, len(self.pieces) - 1)
        return s, idx

    def _evaluate(self, s, what):
        s, idx = self._split(s)
        flat_s, flat_idx = s.reshape(-1), idx.reshape(-1)
        dim = self.kappa.dim
        out = [np.empty((flat_s.size, dim)) for _ in what]
        for j, (piece, tab) in enumerate(zip(self.pieces, self._tables)):
            mask = flat_idx == j
            if not mask.any():
                continue
            t = tab.t_of_s(flat_s[mask] - self._starts[j])
            vals = {}
            if "p" in what:
                vals["p"] = piece.position(t)
            if "d2" in what:
                vals["d1"], vals["d2"] = piece.derivatives(t)
            elif "d1" in what:
                vals["d1"] = piece.velocity(t)
            for slot, key in zip(out, what):
                slot[mask] = vals[key]
        return [o.reshape(s.shape + (dim,)) for o in out], idx

    def points(self, s):
        (p,), _ = self._evaluate(s, ("p",))
        return sf.normalize_point(self.kappa, p)

    def frames(self, s):
        """Points, unit tangents and inward (left) unit normals at ``s``."""
        (p, d1), _ = self._evaluate(s, ("p", "d1"))
        p = sf.normalize_point(self.kappa, p)
        t = sf.normalize_tangent(self.kappa, p, d1)
        n = sf.left_normal(self.kappa, p, t)
        return p, t, n

    def curvatures(self, s):
        (p, d1, d2), idx = self._evaluate(s, ("p", "d1", "d2"))
        p = sf.normalize_point(self.kappa, p)
        t = sf.normalize_tangent(self.kappa, p, d1)
        n = sf.left_normal(self.kappa, p, t)
        k = sf.inner(self.kappa, d2, n) / sf.inner(self.kappa, d1, d1)
        arcs = np.array([pc.is_geodesic_arc for pc in self.pieces])
        return np.where(arcs[idx], 0.0, k)

    def corner_distance(self, s):
        """Arclength distance from ``s`` to the nearest corner (inf if none)."""
        s = np.mod(np.asarray(s, dtype=float), self.total_length)
        if not self.corners:
            return np.full(s.shape, np.inf)
        c = np.asarray(self.corners)
        d = np.abs(s[..., None] - c)
        d = np.minimum(d, self.total_length - d)
        return d.min(axis=-1)

    def near_corner(self, s):
        return self.corner_distance(s) <= self.corner_tol

    def level(self, points):
        raise NotImplementedError

    def locate(self, points):
        raise NotImplementedError

    # -- scalar interface ------------------------------------------------

    def _check_corner(self, s):
        if self.near_corner(s):
            raise CornerHit(f"s = {s!r} is within {self.corner_tol:g} of a corner")

    def point_at(self, s: float) -> SurfacePoint:
        return SurfacePoint(tuple(self.points(float(s))), self.kappa)

    def tangent_at(self, s: float) -> UnitTangent:
        self._check_corner(s)
        p, t, _ = self.frames(float(s))
        return UnitTangent(SurfacePoint(tuple(p), self.kappa), tuple(t))

    def geodesic_curvature(self, s: float) -> float:
        self._check_corner(s)
        return float(self.curvatures(float(s)))


class PolarTable(BoundaryCurve):
    """Star-shaped table ``rho < R(theta)`` around the model origin."""

    def __init__(self, kappa, radius, descriptor=None, **kw):
        self.radius = radius
        super().__init__(kappa, [PolarPiece(kappa, radius)], descriptor, **kw)

    def level(self, points):
        points = np.asarray(points, dtype=float)
        if isinstance(self.radius, ConstantRadius):
            rho, _ = sf.polar_coords(self.kappa, points)
            return rho - self.radius.r
        if isinstance(self.radius, EllipseRadius):
            # same sign pattern as rho - R(theta), cheaper to evaluate
            a, b = self.radius.a, self.radius.b
            return (points[..., 0] / a) ** 2 + (points[..., 1] / b) ** 2 - 1.0
        rho, theta = sf.polar_coords(self.kappa, points)
        return rho - self.radius(theta)

    def locate(self, points):
        _, theta = sf.polar_coords(self.kappa, points)
        t = np.mod(theta / (2 * math.pi), 1.0)
        return np.mod(self._tables[0].s_of_t(t), self.total_length)


class GeodesicPolygon(BoundaryCurve):
    """Convex spherical polygon with great-circle sides, vertices in ccw order."""

    def __init__(self, vertices, descriptor=None, **kw):
        kappa = Curvature.SPHERICAL
        verts = [sf.normalize_point(kappa, v) for v in vertices]
        pieces = []
        for a, b in zip(verts, verts[1:] + verts[:1]):
            v, d = sf.direction_to(kappa, a, b)
            pieces.append(GeodesicArcPiece(kappa, a, v, d))
        self._normals = np.array([sf.left_normal(kappa, pc.p, pc.v) for pc in pieces])
        self._arc_p = np.array([pc.p for pc in pieces])
        self._arc_v = np.array([pc.v for pc in pieces])
        self._arc_len = np.array([pc.length for pc in pieces])
        super().__init__(kappa, pieces, descriptor, **kw)
        if len(self.corners) != len(pieces):
            raise DomainError("polygon has a straight angle at a vertex")

    def level(self, points):
        return -(np.asarray(points) @ self._normals.T).min(axis=-1)

    def locate(self, points):
        points = np.asarray(points, dtype=float)
        j = np.argmin(points @ self._normals.T, axis=-1)
        alpha = np.arctan2(
            (points * self._arc_v[j]).sum(axis=-1), (points * self._arc_p[j]).sum(axis=-1)
        )
        alpha = np.clip(alpha, 0.0, self._arc_len[j])
        return np.mod(self._starts[j] + alpha, self.total_length)


# ---------------------------------------------------------------------------
# finite-difference curvature oracle

def fd_geodesic_curvature(b: BoundaryCurve, s, h=1e-2):
    """Geodesic curvature from ``point_at`` alone.

    Second-order central differences of position along the arclength, taken
    at steps ``h`` and ``h/2`` and combined by Richardson extrapolation.
    Independent of the analytic derivative code paths.
    """
    s = np.asarray(s, dtype=float)

    def estimate(step):
        pm = b.points(s - step)
        p0 = b.points(s)
        pp = b.points(s + step)
        tang = sf.normalize_tangent(b.kappa, p0, (pp - pm) / (2 * step))
        n = sf.left_normal(b.kappa, p0, tang)
        acc = (pp - 2 * p0 + pm) / step**2
        return sf.inner(b.kappa, acc, n)

    return (4 * estimate(h / 2) - estimate(h)) / 3


# ---------------------------------------------------------------------------
# families

FAMILIES = (
    "geodesic_circle",
    "ellipse_euclidean",
    "fourier_perturbed_circle",
    "octant_s2",
    "hemisphere_s2",
)


@dataclass(frozen=True)
class FamilySpec:
    """Serializable description of a built-in table."""

    family: str
    kappa: int = 0
    r: float = 1.0
    a: float = 1.0
    b: float = 1.0
    amplitudes: tuple = ()

    def to_dict(self) -> dict:
        if self.family in ("octant_s2", "hemisphere_s2"):
            return {"family": self.family}
        if self.family == "ellipse_euclidean":
            return {"family": self.family, "a": self.a, "b": self.b}
        d = {"family": self.family, "kappa": self.kappa, "r": self.r}
        if self.family == "fourier_perturbed_circle":
            d["amplitudes"] = list(self.amplitudes)
        return d

    @classmethod
    def parse(cls, spec) -> "FamilySpec":
        """Accept a FamilySpec, a dict, or a string ``name[:key=val,...]``.

        In the string form, amplitude lists are separated by ``;``, e.g.
        ``fourier_perturbed_circle:kappa=-1,r=1,amplitudes=0;0.04;0.02``.
        """
        if isinstance(spec, cls):
            return spec
        if isinstance(spec, str):
            name, _, rest = spec.strip().partition(":")
            d = {"family": name.strip()}
            for item in filter(None, (x.strip() for x in rest.split(","))):
                key, eq, val = item.partition("=")
                if not eq:
                    raise DomainError(f"bad table parameter {item!r}")
                key = key.strip()
                if key == "amplitudes":
                    d[key] = [float(x) for x in val.split(";") if x.strip()]
                elif key == "kappa":
                    d[key] = val.strip()
                else:
                    d[key] = float(val)
            spec = d
        if not isinstance(spec, dict):
            raise DomainError(f"cannot interpret table descriptor {spec!r}")
        spec = dict(spec)
        family = spec.pop("family", None)
        if family not in FAMILIES:
            raise DomainError(f"unknown table family {family!r}; choose from {FAMILIES}")
        if "kappa" in spec:
            spec["kappa"] = int(Curvature.coerce(spec["kappa"]))
        if "amplitudes" in spec:
            spec["amplitudes"] = tuple(float(x) for x in spec["amplitudes"])
        unknown = set(spec) - {"kappa", "r", "a", "b", "amplitudes"}
        if unknown:
            raise DomainError(f"unexpected parameters {sorted(unknown)} for {family}")
        try:
            return cls(family=family, **{k: v for k, v in spec.items()})
        except (TypeError, ValueError) as exc:
            raise DomainError(str(exc)) from None


def make_family(spec, **kwargs) -> BoundaryCurve:
    """Build one of the built-in tables.

    ``spec`` is a family name, a descriptor string, a dict or a
    :class:`FamilySpec`; keyword arguments are merged into name-only specs::

        make_family("geodesic_circle", kappa=-1, r=1.0)
        make_family("ellipse_euclidean:a=1.2,b=1.0")
        make_family({"family": "octant_s2"})
    """
    if isinstance(spec, str) and kwargs and ":" not in spec:
        spec = dict(kwargs, family=spec)
    fs = FamilySpec.parse(spec)
    desc = fs.to_dict()
    if fs.family == "octant_s2":
        return GeodesicPolygon(np.eye(3), descriptor=desc)
    if fs.family == "hemisphere_s2":
        return PolarTable(Curvature.SPHERICAL, ConstantRadius(math.pi / 2), descriptor=desc)
    if fs.family == "ellipse_euclidean":
        if not (fs.a > 0 and fs.b > 0):
            raise DomainError("ellipse semi-axes must be positive")
        return PolarTable(Curvature.EUCLIDEAN, EllipseRadius(fs.a, fs.b), descriptor=desc)
    kappa = Curvature.coerce(fs.kappa)
    if not fs.r > 0:
        raise DomainError("radius must be positive")
    if kappa == Curvature.SPHERICAL and fs.r >= math.pi / 2:
        raise DomainError("spherical geodesic circles need r < pi/2 (use hemisphere_s2)")
    if fs.family == "geodesic_circle":
        return PolarTable(kappa, ConstantRadius(fs.r), descriptor=desc)
    radius = FourierRadius(fs.r, fs.amplitudes)
    rmin = radius(np.linspace(0, 2 * math.pi, 2048, endpoint=False)).min()
    if rmin <= 0:
        raise DomainError("perturbation makes the radius non-positive")
    return PolarTable(kappa, radius, descriptor=desc)
