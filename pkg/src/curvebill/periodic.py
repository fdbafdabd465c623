"""Three-period orbits: variational search, compatibility residuals, classification.

Triangles inscribed in the table are critical points of the perimeter
``L(s0, s1, s2)``; at a critical point the reflection law holds at every
vertex.  :func:`find_3period` locates them with damped Newton iterations and
confirms each candidate by actually iterating the billiard map.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import jacobi
from . import surface as sf
from .billiard import EPS_PHI, Orbit, PhasePoint, iterate, return_error
from .boundary import BoundaryCurve
from .errors import CurvebillError, DomainError
from .surface import Curvature

MIN_SEPARATION = 1e-9
NEWTON_MAX_ITER = 100
GRAD_TOL = 1e-12
HESSIAN_STEP = 1e-5
DEGENERATE_SV = 1e-8
MIN_SIDE = 1e-6
DEDUP_TOL = 1e-6
RETURN_TOL = 1e-8

SPECIAL_MULTIPLES = (1, 3, 5)
PERIMETER_TOL = 1e-6
FLAT_TOL = 1e-9
PROBE_RADIUS = 0.01
PROBE_POINTS = 5
ORTHOGONALITY_TOL = 1e-6


class Classification(str, enum.Enum):
    GENERIC_ISOLATED = "GenericIsolated"
    SPHERICAL_SPECIAL_CANDIDATE = "SphericalSpecialCandidate"
    DEGENERATE = "Degenerate"


# ---------------------------------------------------------------------------
# perimeter and its gradient

def _vertices(b: BoundaryCurve, s):
    p = b.points(np.asarray(s, dtype=float))
    for i in range(3):
        j = (i + 1) % 3
        if sf.dist(b.kappa, p[i], p[j]) <= MIN_SEPARATION:
            raise DomainError(f"vertices {i} and {j} coincide")
    return p


def perimeter(b: BoundaryCurve, s0: float, s1: float, s2: float) -> float:
    """Total length of the geodesic triangle through three boundary points."""
    p = _vertices(b, [s0, s1, s2])
    return float(sf.dist(b.kappa, p, np.roll(p, -1, axis=0)).sum())


def grad_perimeter(b: BoundaryCurve, s0: float, s1: float, s2: float) -> np.ndarray:
    """Analytic gradient of :func:`perimeter` with respect to the arclengths.

    Moving vertex ``i`` along the unit tangent ``t_i`` changes the two
    incident sides at rates ``-<t_i, u>`` where ``u`` is the unit direction
    towards the neighbour, so the component vanishes exactly when the
    neighbours make equal angles with the tangent (the mirror law).
    """
    s = np.array([s0, s1, s2], dtype=float)
    _vertices(b, s)
    for si in s:
        b._check_corner(si)
    p, t, _ = b.frames(s)
    u_next, _ = sf.direction_to(b.kappa, p, np.roll(p, -1, axis=0))
    u_prev, _ = sf.direction_to(b.kappa, p, np.roll(p, 1, axis=0))
    return -(sf.inner(b.kappa, t, u_next) + sf.inner(b.kappa, t, u_prev))


def hessian_perimeter(b: BoundaryCurve, s, h: float = HESSIAN_STEP) -> np.ndarray:
    """Central differences of :func:`grad_perimeter`, symmetrized."""
    s = np.asarray(s, dtype=float)
    H = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        H[:, j] = (grad_perimeter(b, *(s + e)) - grad_perimeter(b, *(s - e))) / (2 * h)
    return 0.5 * (H + H.T)


def vertex_angles(b: BoundaryCurve, s) -> np.ndarray:
    """Outgoing angle at each vertex towards the next one."""
    s = np.asarray(s, dtype=float)
    p, t, n = b.frames(s)
    u, _ = sf.direction_to(b.kappa, p, np.roll(p, -1, axis=0))
    return np.arctan2(sf.inner(b.kappa, u, n), sf.inner(b.kappa, u, t))


# ---------------------------------------------------------------------------
# orbit search

def _newton(b: BoundaryCurve, s):
    """Damped Newton on ``grad = 0``; returns ``(s, grad_norm, hessian)`` or None."""
    try:
        g = grad_perimeter(b, *s)
    except CurvebillError:
        return None
    gn = float(np.linalg.norm(g))
    H = None
    for _ in range(NEWTON_MAX_ITER):
        if gn <= GRAD_TOL:
            break
        try:
            H = hessian_perimeter(b, s)
        except CurvebillError:
            return None
        # min-norm step: singular directions (critical manifolds) are left alone
        stp = -np.linalg.pinv(H, rcond=1e-9) @ g
        lam = 1.0
        while lam > 1e-6:
            trial = s + lam * stp
            try:
                gt = grad_perimeter(b, *trial)
            except CurvebillError:
                lam *= 0.5
                continue
            gtn = float(np.linalg.norm(gt))
            if gtn < gn or gtn <= GRAD_TOL:
                s, g, gn = trial, gt, gtn
                break
            lam *= 0.5
        else:
            return None
    if gn > GRAD_TOL:
        return None
    try:
        H = hessian_perimeter(b, s)
    except CurvebillError:
        return None
    return np.mod(s, b.total_length), gn, H


def _circular_gap(L, a, c):
    d = abs((a - c) % L)
    return min(d, L - d)


def _confirm(b: BoundaryCurve, s, grad_norm, H):
    """Turn a critical triple into a verified orbit, or None."""
    L = b.total_length
    # increasing arclength is the counterclockwise traversal
    s = np.sort(np.mod(s, L))
    try:
        p = _vertices(b, s)
    except DomainError:
        return None
    sides = sf.dist(b.kappa, p, np.roll(p, -1, axis=0))
    if sides.min() <= MIN_SIDE:
        return None
    phi = vertex_angles(b, s)
    if np.any(phi <= EPS_PHI) or np.any(phi >= math.pi - EPS_PHI):
        return None
    try:
        orbit = iterate(b, PhasePoint(float(s[0]), float(phi[0])), 3)
    except CurvebillError:
        return None
    for k in (1, 2):
        if _circular_gap(L, orbit.vertices[k], s[k]) > RETURN_TOL:
            return None
    err = return_error(b, orbit)
    if err >= RETURN_TOL:
        return None
    smin = float(np.linalg.svd(H, compute_uv=False).min())
    return dataclasses.replace(
        orbit,
        degenerate=smin < DEGENERATE_SV,
        extra={"grad_norm": grad_norm, "hessian_min_sv": smin, "return_error": err},
    )


def _one_start(args):
    b, seed, k = args
    rng = np.random.default_rng([int(seed), k])
    s0 = np.sort(rng.random(3)) * b.total_length
    res = _newton(b, s0)
    if res is None:
        return None
    return _confirm(b, *res)


def same_triangle(L: float, a, c, tol: float = DEDUP_TOL) -> bool:
    """Vertex sets equal up to cyclic relabeling and reversal."""
    a = list(a)
    for seq in (list(c), list(c)[::-1]):
        for r in range(3):
            rot = seq[r:] + seq[:r]
            if max(_circular_gap(L, x, y) for x, y in zip(a, rot)) < tol:
                return True
    return False


def find_3period(b: BoundaryCurve, multistarts: int, seed: int, workers: int = 1) -> list[Orbit]:
    """Search for 3-period orbits from ``multistarts`` random initial triangles.

    Each start draws from its own stream ``(seed, start index)``.  Verified
    orbits are deduplicated and returned sorted by their sorted vertex
    arclengths, so the result does not depend on ``workers``.  Orbits whose
    perimeter Hessian is singular are returned with ``degenerate=True``.
    """
    if multistarts < 1:
        raise DomainError("need at least one start")
    jobs = [(b, seed, k) for k in range(multistarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_start, jobs))
    else:
        results = [_one_start(j) for j in jobs]
    found: list[Orbit] = []
    for orb in results:
        if orb is None:
            continue
        if any(same_triangle(b.total_length, orb.vertices, o.vertices) for o in found):
            continue
        found.append(orb)
    found.sort(key=lambda o: tuple(sorted(o.vertices)))
    return found


# ---------------------------------------------------------------------------
# compatibility relation

@dataclass
class CompatibilityReport:
    orbit: Orbit
    kappa: int
    residuals: tuple
    F_value: float
    classification: Classification
    probe_radius: float = PROBE_RADIUS
    kg_values: tuple = ()
    bisectors: tuple = ()
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        o = self.orbit
        return {
            "vertices": list(o.vertices),
            "angles": list(o.angles),
            "sides": list(o.sides),
            "perimeter": o.perimeter,
            "kappa": self.kappa,
            "residuals": list(self.residuals),
            "kg": list(self.kg_values),
            "F": self.F_value,
            "classification": self.classification.value,
            "probe_radius": self.probe_radius,
            "degenerate": o.degenerate,
            **{k: v for k, v in o.extra.items()},
        }


def _bisectors(b: BoundaryCurve, s):
    p = b.points(np.asarray(s, dtype=float))
    u_next, _ = sf.direction_to(b.kappa, p, np.roll(p, -1, axis=0))
    u_prev, _ = sf.direction_to(b.kappa, p, np.roll(p, 1, axis=0))
    w = u_next + u_prev
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def _flat_near(b: BoundaryCurve, s, radius) -> bool:
    probe = np.asarray(s)[:, None] + np.linspace(-radius, radius, PROBE_POINTS)
    return bool(np.all(np.abs(b.curvatures(probe)) < FLAT_TOL))


def compatibility_report(b: BoundaryCurve, orbit: Orbit,
                         probe_radius: float = PROBE_RADIUS) -> CompatibilityReport:
    """Residuals ``k_g(s_i) - sin(phi_i)**3 * F(L)`` at the three vertices."""
    if orbit.n != 3:
        raise DomainError("compatibility report needs a 3-bounce orbit")
    L = orbit.perimeter
    kg = tuple(b.geodesic_curvature(s) for s in orbit.vertices)
    F = jacobi.f_of_l(b.kappa, L)
    res = tuple(k - math.sin(a) ** 3 * F for k, a in zip(kg, orbit.angles))
    special = (
        b.kappa == Curvature.SPHERICAL
        and any(abs(L - m * math.pi) < PERIMETER_TOL for m in SPECIAL_MULTIPLES)
        and _flat_near(b, orbit.vertices, probe_radius)
    )
    if special:
        cls = Classification.SPHERICAL_SPECIAL_CANDIDATE
    elif orbit.degenerate:
        cls = Classification.DEGENERATE
    else:
        cls = Classification.GENERIC_ISOLATED
    bis = ()
    if b.kappa == Curvature.SPHERICAL:
        bis = tuple(tuple(w) for w in _bisectors(b, orbit.vertices))
    return CompatibilityReport(orbit, int(b.kappa), res, F, cls, probe_radius, kg, bis)


def entry_identity_check(b: BoundaryCurve, orbit: Orbit):
    """Two computations of the same top-right mismatch along a 3-period orbit.

    Returns ``(from_matrices, from_closed_form)``; they agree for any orbit,
    and vanish only where the three-bounce derivative is the identity.
    """
    x, z, y = orbit.sides
    phi0, phi1, phi2 = orbit.angles
    k0, k1, k2 = (b.geodesic_curvature(s) for s in orbit.vertices)
    m = jacobi.top_right_mismatch(b.kappa, x, y, z, phi0, phi1, phi2, k0, k1, k2)
    c = jacobi.top_right_closed_form(b.kappa, x, y, z, phi1, k1)
    return m, c


def classify_theorem2(reports) -> dict:
    """Partition reports by classification and check the special geometry.

    For each spherical special candidate, the great circles through the
    vertices orthogonal to the angle bisectors must be pairwise orthogonal;
    their plane normals are the bisectors themselves.
    """
    summary = {c.value: 0 for c in Classification}
    special = []
    for i, r in enumerate(reports):
        summary[r.classification.value] += 1
        if r.classification != Classification.SPHERICAL_SPECIAL_CANDIDATE:
            continue
        w = np.asarray(r.bisectors)
        gram = np.abs(w @ w.T - np.eye(3))
        worst = float(gram.max())
        special.append({
            "index": i,
            "perimeter": r.orbit.perimeter,
            "max_abs_cos": worst,
            "orthogonal": worst < ORTHOGONALITY_TOL,
        })
    return {
        "counts": summary,
        "special": special,
        "all_special_orthogonal": all(s["orthogonal"] for s in special),
    }
