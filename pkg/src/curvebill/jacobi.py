"""2x2 Jacobi-field matrices acting on the column ``(J, J')``.

``J`` is the transversal amplitude of a Jacobi field along a billiard
trajectory and ``J'`` its derivative along the geodesic.  Free flight over
arclength ``tau`` acts by the fundamental solution matrix of
``J'' + kappa J = 0``; a reflection with geodesic curvature ``k_g`` at angle
``phi`` acts by the mirror-formula matrix.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np

from .errors import DomainError, GrazingReflection
from .surface import Curvature

GRAZING_SIN = 1e-12

# Evolution-matrix variants.  "printed" has +sin in the lower-left corner on
# S2; it does not solve the Jacobi equation and exists only so the
# verification battery can demonstrate that it breaks the entry identity.
FUNDAMENTAL = "fundamental"
PRINTED = "printed"


def evolution(kappa, tau: float, variant: str = FUNDAMENTAL) -> np.ndarray:
    """Propagator of ``(J, J')`` over a geodesic segment of length ``tau``."""
    kappa = Curvature.coerce(kappa)
    if kappa == Curvature.EUCLIDEAN:
        return np.array([[1.0, tau], [0.0, 1.0]])
    if kappa == Curvature.HYPERBOLIC:
        c, s = math.cosh(tau), math.sinh(tau)
        return np.array([[c, s], [s, c]])
    c, s = math.cos(tau), math.sin(tau)
    if variant == PRINTED:
        return np.array([[c, s], [s, c]])
    if variant != FUNDAMENTAL:
        raise DomainError(f"unknown evolution variant {variant!r}")
    return np.array([[c, s], [-s, c]])


def reflection(k_g: float, phi: float) -> np.ndarray:
    """Mirror-formula matrix ``[[-1, 0], [2 k_g / sin(phi), -1]]``."""
    sphi = math.sin(phi)
    if sphi <= GRAZING_SIN:
        raise GrazingReflection(f"sin(phi) = {sphi:.3g} at phi = {phi!r}")
    return np.array([[-1.0, 0.0], [2.0 * k_g / sphi, -1.0]])


def f_of_l(kappa, L: float) -> float:
    """The perimeter function in ``k_g = sin(phi)**3 * F(L)``.

    ``2/L`` on E2, ``coth(L/2)`` on H2, ``cot(L/2)`` on S2.
    """
    kappa = Curvature.coerce(kappa)
    if not L > 0:
        raise DomainError("perimeter must be positive")
    if kappa == Curvature.EUCLIDEAN:
        return 2.0 / L
    if kappa == Curvature.HYPERBOLIC:
        return 1.0 / math.tanh(L / 2)
    half = L / 2
    if abs(math.sin(half)) < 1e-12:
        raise DomainError(f"cot(L/2) has a pole at L = {L!r}")
    # cos/sin keeps cot(pi/2) at ~6e-17 instead of 1/tan overflow noise
    return math.cos(half) / math.sin(half)


def three_bounce_product(kappa, x, y, z, phi0, phi1, phi2, k0, k1, k2,
                         variant: str = FUNDAMENTAL) -> np.ndarray:
    """``P(z) R(x1) P(x) R(x0) P(y) R(x2)``.

    Side ``y`` joins vertex 2 to vertex 0, ``x`` joins 0 to 1 and ``z``
    joins 1 to 2; the product maps incoming data at vertex 2 once around
    the triangle.
    """
    if min(x, y, z) <= 0:
        raise DomainError("side lengths must be positive")
    P = lambda t: evolution(kappa, t, variant)  # noqa: E731
    return (P(z) @ reflection(k1, phi1) @ P(x) @ reflection(k0, phi0)
            @ P(y) @ reflection(k2, phi2))


def cycle_product(kappa, sides, angles, curvatures, variant: str = FUNDAMENTAL) -> np.ndarray:
    """Generic fold ``P(tau_{n-1}) R_{n-1} ... P(tau_0) R_0`` over an n-bounce cycle.

    ``sides[i]`` is flown after reflecting at vertex ``i``.
    """
    mats = [evolution(kappa, t, variant) @ reflection(k, a)
            for t, a, k in zip(sides, angles, curvatures)]
    return reduce(lambda acc, m: m @ acc, mats, np.eye(2))


def top_right_mismatch(kappa, x, y, z, phi0, phi1, phi2, k0, k1, k2,
                       variant: str = FUNDAMENTAL) -> float:
    """Top-right entry of ``P(z) R1 P(x)`` minus that of ``R2^-1 P(y)^-1 R0^-1``."""
    P = lambda t: evolution(kappa, t, variant)  # noqa: E731
    lhs = P(z) @ reflection(k1, phi1) @ P(x)
    rhs = (np.linalg.inv(reflection(k2, phi2)) @ np.linalg.inv(P(y))
           @ np.linalg.inv(reflection(k0, phi0)))
    return float(lhs[0, 1] - rhs[0, 1])


def top_right_closed_form(kappa, x, y, z, phi1, k1) -> float:
    """``2 k1 S(x) S(z) / sin(phi1) - [S(x + z) - S(y)]`` with ``S`` = sin, sinh or identity."""
    kappa = Curvature.coerce(kappa)
    S = {Curvature.SPHERICAL: math.sin, Curvature.HYPERBOLIC: math.sinh,
         Curvature.EUCLIDEAN: lambda t: t}[kappa]
    return 2.0 * k1 * S(x) * S(z) / math.sin(phi1) - (S(x + z) - S(y))


def phase_to_jacobi(phi: float, k_g: float) -> np.ndarray:
    """Matrix taking a phase variation ``(ds, dphi)`` to outgoing ``(J, J')``.

    ``J = -sin(phi) ds`` and ``J' = k_g ds + dphi``, with ``J`` measured
    along the left normal of the outgoing ray.  With this convention one
    bounce has derivative ``A(x1)^-1 R(x1) P(tau) A(x0)`` in ``(s, phi)``,
    which the test suite checks against finite differences.
    """
    return np.array([[-math.sin(phi), 0.0], [k_g, 1.0]])
