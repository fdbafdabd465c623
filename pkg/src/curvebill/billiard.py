"""The billiard map on boundary phase space ``(s, phi)`` and its derivative.

``phi`` is the angle of the outgoing ray measured counterclockwise from the
boundary tangent, so ``0 < phi < pi`` points into the table.  The core
routine :func:`step` works on whole arrays of phase points at once; the
scalar helpers raise on corner, grazing and missed collisions instead of
returning status codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jacobi
from . import surface as sf
from .boundary import BoundaryCurve
from .errors import CornerHit, DomainError, GrazingReflection, NoIntersection
from .surface import Curvature

TAU_MIN = 1e-9
EPS_PHI = 1e-9
FD_STEP = 1e-5

_BISECT_WIDTH = 1e-9
_MAX_STEP = 0.05

# status codes returned by the array interface
OK = 0
CORNER = 1
GRAZING = 2
NO_HIT = 3

_ERRORS = {CORNER: CornerHit, GRAZING: GrazingReflection, NO_HIT: NoIntersection}


@dataclass(frozen=True)
class PhasePoint:
    s: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.phi < math.pi):
            raise DomainError(f"phi must lie in (0, pi), got {self.phi!r}")


@dataclass(frozen=True)
class Orbit:
    """A finite bounce sequence.

    ``sides[i]`` joins vertex ``i`` to vertex ``i + 1`` (mod n) and
    ``angles[i]`` is the outgoing angle at vertex ``i``.  ``end`` is the
    phase point reached after the last side.
    """

    vertices: tuple
    angles: tuple
    sides: tuple
    perimeter: float
    end: PhasePoint | None = None
    degenerate: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def start(self) -> PhasePoint:
        return PhasePoint(self.vertices[0], self.angles[0])


# ---------------------------------------------------------------------------
# array interface

def _search_limit(b: BoundaryCurve) -> float:
    if b.kappa == Curvature.SPHERICAL:
        return 2 * math.pi - TAU_MIN
    # any chord is shorter than half the perimeter
    return b.total_length


def shoot(b: BoundaryCurve, p, v):
    """Arclength to the first boundary crossing along the geodesics ``(p, v)``.

    Marches in fixed steps until the level function turns positive, then
    bisects the bracket and finishes with one secant step.  Returns
    ``(tau, found)``.
    """
    kappa = b.kappa
    n = p.shape[0]
    limit = _search_limit(b)
    step = min(b.total_length / 64, _MAX_STEP)
    lo = np.full(n, TAU_MIN)
    hi = np.full(n, np.nan)
    found = np.zeros(n, dtype=bool)
    active = np.arange(n)
    cur = lo.copy()
    while active.size:
        nxt = np.minimum(cur[active] + step, limit)
        q, _ = sf.flow(kappa, p[active], v[active], nxt)
        crossed = b.level(q) > 0
        hit = active[crossed]
        lo[hit] = cur[hit]
        hi[hit] = nxt[crossed]
        found[hit] = True
        cur[active] = nxt
        keep = ~crossed & (nxt < limit)
        active = active[keep]
    idx = np.flatnonzero(found)
    a, c = lo[idx], hi[idx]
    pp, vv = p[idx], v[idx]
    while True:
        wide = (c - a) > _BISECT_WIDTH
        if not wide.any():
            break
        mid = 0.5 * (a + c)
        q, _ = sf.flow(kappa, pp, vv, mid)
        out = b.level(q) > 0
        c = np.where(wide & out, mid, c)
        a = np.where(wide & ~out, mid, a)
    ga = b.level(sf.flow(kappa, pp, vv, a)[0])
    gc = b.level(sf.flow(kappa, pp, vv, c)[0])
    denom = gc - ga
    safe = denom > 0
    tau = np.where(safe, a - ga * (c - a) / np.where(safe, denom, 1.0), 0.5 * (a + c))
    tau = np.clip(tau, a, c)
    out = np.full(n, np.nan)
    out[idx] = tau
    return out, found


def step(b: BoundaryCurve, s, phi):
    """One application of the billiard map to arrays of phase points.

    Returns ``(s_new, phi_new, tau, status)``; entries whose status is not
    ``OK`` hold NaN.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    kappa = b.kappa
    n = s.size
    s_new = np.full(n, np.nan)
    phi_new = np.full(n, np.nan)
    tau = np.full(n, np.nan)
    status = np.full(n, OK, dtype=np.int8)

    bad = b.near_corner(s)
    status[bad] = CORNER
    good = np.flatnonzero(~bad)
    p, t, nrm = b.frames(s[good])
    v = np.cos(phi[good])[:, None] * t + np.sin(phi[good])[:, None] * nrm
    tt, found = shoot(b, p, v)
    status[good[~found]] = NO_HIT
    good, p, v, tt = good[found], p[found], v[found], tt[found]

    q, w = sf.flow(kappa, p, v, tt)
    s1 = b.locate(q)
    corner = b.near_corner(s1)
    status[good[corner]] = CORNER
    good, w, s1, tt = good[~corner], w[~corner], s1[~corner], tt[~corner]

    _, t1, n1 = b.frames(s1)
    # mirror law: keep the tangential component, flip the normal one
    phi1 = np.arctan2(-sf.inner(kappa, w, n1), sf.inner(kappa, w, t1))
    grazing = (phi1 <= EPS_PHI) | (phi1 >= math.pi - EPS_PHI)
    status[good[grazing]] = GRAZING
    keep = ~grazing
    s_new[good[keep]] = s1[keep]
    phi_new[good[keep]] = phi1[keep]
    tau[good[keep]] = tt[keep]
    return s_new, phi_new, tau, status


def map_power(b: BoundaryCurve, s, phi, n: int):
    """Apply the billiard map ``n`` times; returns ``(s, phi, length, status)``.

    ``status`` records the first failure; failed entries are NaN.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float)).copy()
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).copy()
    length = np.zeros(s.size)
    status = np.full(s.size, OK, dtype=np.int8)
    alive = np.arange(s.size)
    for _ in range(n):
        s1, p1, tt, st = step(b, s[alive], phi[alive])
        failed = st != OK
        status[alive[failed]] = st[failed]
        s[alive], phi[alive] = s1, p1
        length[alive] += tt
        alive = alive[~failed]
    dead = status != OK
    s[dead] = phi[dead] = length[dead] = np.nan
    return s, phi, length, status


def phase_distance(total_length: float, s0, phi0, s1, phi1):
    """Euclidean distance in ``(s, phi)`` with ``s`` taken modulo the perimeter."""
    ds = np.abs(np.mod(np.asarray(s1) - np.asarray(s0), total_length))
    ds = np.minimum(ds, total_length - ds)
    return np.hypot(ds, np.asarray(phi1) - np.asarray(phi0))


# ---------------------------------------------------------------------------
# scalar interface

def next_collision(b: BoundaryCurve, p: PhasePoint):
    """Follow the outgoing ray at ``p`` to the next bounce.

    Returns the new phase point and the length of the chord.
    """
    s1, phi1, tau, status = step(b, p.s, p.phi)
    code = int(status[0])
    if code != OK:
        raise _ERRORS[code](f"collision from (s={p.s!r}, phi={p.phi!r}) failed")
    return PhasePoint(float(s1[0]), float(phi1[0])), float(tau[0])


def iterate(b: BoundaryCurve, p: PhasePoint, n: int) -> Orbit:
    """Iterate the map ``n`` times from ``p``, recording the orbit.

    Collision errors are re-raised with a ``bounce`` attribute holding the
    zero-based index of the failing bounce.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    verts, angles, sides = [], [], []
    cur = p
    for i in range(n):
        verts.append(cur.s)
        angles.append(cur.phi)
        try:
            cur, tau = next_collision(b, cur)
        except (CornerHit, GrazingReflection, NoIntersection) as exc:
            exc.bounce = i
            raise
        sides.append(tau)
    return Orbit(tuple(verts), tuple(angles), tuple(sides), float(sum(sides)), end=cur)


def return_error(b: BoundaryCurve, orbit: Orbit) -> float:
    """Phase distance between the end of ``orbit`` and its start."""
    e = orbit.end
    return float(phase_distance(b.total_length, orbit.vertices[0], orbit.angles[0], e.s, e.phi))


def d3_jacobi(b: BoundaryCurve, orbit: Orbit, variant=jacobi.FUNDAMENTAL,
              kg_sign: float = 1.0) -> np.ndarray:
    """Derivative of the three-bounce map assembled from Jacobi matrices.

    Vertex ``i`` of ``orbit`` plays the role of ``x_i``; ``kg_sign`` and
    ``variant`` exist for the verification battery's negative controls.
    """
    if orbit.n != 3:
        raise DomainError("d3_jacobi needs a 3-bounce orbit")
    k = [kg_sign * b.geodesic_curvature(s) for s in orbit.vertices]
    x, z, y = orbit.sides
    phi0, phi1, phi2 = orbit.angles
    return jacobi.three_bounce_product(b.kappa, x, y, z, phi0, phi1, phi2, *k, variant=variant)


def cycle_jacobi(b: BoundaryCurve, orbit: Orbit) -> np.ndarray:
    """Jacobi product once around an n-bounce orbit, starting before vertex 0."""
    k = [b.geodesic_curvature(s) for s in orbit.vertices]
    return jacobi.cycle_product(b.kappa, orbit.sides, orbit.angles, k)


def d3_finite_difference(b: BoundaryCurve, p: PhasePoint, h: float = FD_STEP,
                         period: int = 3) -> np.ndarray:
    """Central-difference Jacobian of ``T**period`` in ``(s, phi)`` at ``p``."""
    s = np.array([p.s + h, p.s - h, p.s, p.s])
    phi = np.array([p.phi, p.phi, p.phi + h, p.phi - h])
    s1, phi1, _, status = map_power(b, s, phi, period)
    if np.any(status != OK):
        code = int(status[status != OK][0])
        raise _ERRORS[code]("finite-difference stencil hit a singular point")
    L = b.total_length

    def ds(a, c):
        d = np.mod(a - c + L / 2, L) - L / 2
        return d

    jac = np.empty((2, 2))
    jac[0, 0] = ds(s1[0], s1[1]) / (2 * h)
    jac[1, 0] = (phi1[0] - phi1[1]) / (2 * h)
    jac[0, 1] = ds(s1[2], s1[3]) / (2 * h)
    jac[1, 1] = (phi1[2] - phi1[3]) / (2 * h)
    return jac
