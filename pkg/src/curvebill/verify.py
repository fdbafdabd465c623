"""Built-in verification battery behind ``curvebill verify``.

Each check returns a :class:`CheckResult`.  Two debug switches turn the
battery into a negative control: ``printed_s2`` swaps in the spherical
evolution matrix with ``+sin`` in the lower-left entry, and ``flip_kg``
negates the geodesic curvature fed to the reflection matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jacobi
from . import surface as sf
from .billiard import d3_finite_difference, d3_jacobi, iterate, PhasePoint
from .boundary import make_family
from .measure import invariance_test
from .periodic import find_3period
from .surface import Curvature


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


CIRCLES = (
    "geodesic_circle:kappa=0,r=1",
    "geodesic_circle:kappa=-1,r=1",
    "geodesic_circle:kappa=1,r=1",
)


def _random_triples(rng, n):
    x, y, z = rng.uniform(0.05, 2.5, (3, n))
    phis = rng.uniform(0.1, math.pi - 0.1, (3, n))
    ks = rng.uniform(-2.0, 2.0, (3, n))
    return x, y, z, phis, ks


def check_group_laws(rng, variant, n=1000, tol=1e-12) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        kappa = Curvature(int(rng.integers(-1, 2)))
        a, b = rng.uniform(0, 3, 2)
        P = lambda t: jacobi.evolution(kappa, t, variant)  # noqa: E731
        scale = max(1.0, np.abs(P(a + b)).max())
        worst = max(
            worst,
            abs(np.linalg.det(P(a)) - 1.0) / scale**2,
            np.abs(P(a) @ P(b) - P(a + b)).max() / scale,
            np.abs(P(a) @ P(-a) - np.eye(2)).max() / scale**2,
        )
    return CheckResult("matrix_group_laws", worst <= tol, f"max relative error {worst:.2e}")


def check_entry_identity(rng, variant, n=1000, tol=1e-10) -> CheckResult:
    x, y, z, phis, ks = _random_triples(rng, n)
    worst = 0.0
    for kappa in (Curvature.HYPERBOLIC, Curvature.SPHERICAL):
        for i in range(n):
            m = jacobi.top_right_mismatch(kappa, x[i], y[i], z[i], *phis[:, i], *ks[:, i],
                                          variant=variant)
            c = jacobi.top_right_closed_form(kappa, x[i], y[i], z[i], phis[1, i], ks[1, i])
            worst = max(worst, abs(m - c) / max(1.0, abs(c)))
    return CheckResult("top_right_entry_identity", worst <= tol, f"max error {worst:.2e}")


def check_trace_conjugacy(variant, kg_sign, seed, tol=1e-4) -> CheckResult:
    worst = 0.0
    count = 0
    for spec in CIRCLES + ("fourier_perturbed_circle:kappa=-1,r=1,amplitudes=0;0.04;0.02",):
        b = make_family(spec)
        for orb in find_3period(b, 4, seed):
            tj = np.trace(d3_jacobi(b, orb, variant=variant, kg_sign=kg_sign))
            tf = np.trace(d3_finite_difference(b, orb.start))
            worst = max(worst, abs(tj - tf) / max(1.0, abs(tf)))
            count += 1
    ok = count > 0 and worst <= tol
    return CheckResult("mirror_formula_trace", ok, f"{count} orbits, max relative error {worst:.2e}")


def check_octant_identity(variant, tol=1e-9) -> CheckResult:
    b = make_family("octant_s2")
    orb = iterate(b, PhasePoint(0.4, 1.1), 3)
    err = float(np.abs(d3_jacobi(b, orb, variant=variant) - np.eye(2)).max())
    return CheckResult("octant_identity", err <= tol, f"|DT^3 - I| = {err:.2e}")


def check_law_of_cosines(rng, n=300, tol=1e-10) -> CheckResult:
    worst = 0.0
    for kappa in Curvature:
        p = sf.origin(kappa)
        e1, e2 = sf.frame(kappa)
        for _ in range(n // 3):
            x, z = rng.uniform(0.1, 2.5, 2)
            theta = rng.uniform(0.1, math.pi - 0.1)
            u = e1
            v = math.cos(theta) * e1 + math.sin(theta) * e2
            a, _ = sf.flow(kappa, p, u, x)
            c, _ = sf.flow(kappa, p, v, z)
            y = sf.law_of_cosines_side(x, z, theta, kappa)
            worst = max(worst, abs(float(sf.dist(kappa, a, c)) - y))
    return CheckResult("law_of_cosines_closure", worst <= tol, f"max error {worst:.2e}")


def check_invariance(seed, n=20000) -> CheckResult:
    details = []
    ok = True
    for spec in CIRCLES:
        rep = invariance_test(make_family(spec), n, seed)
        ok &= rep.passed
        details.append(f"{spec.split(':')[1]}={'ok' if rep.passed else 'FAIL'}")
    return CheckResult("mu_invariance", ok, ", ".join(details))


def run_battery(seed: int = 0, printed_s2: bool = False, flip_kg: bool = False) -> list[CheckResult]:
    variant = jacobi.PRINTED if printed_s2 else jacobi.FUNDAMENTAL
    kg_sign = -1.0 if flip_kg else 1.0
    rng = np.random.default_rng(seed)
    return [
        check_group_laws(rng, variant),
        check_entry_identity(rng, variant),
        check_trace_conjugacy(variant, kg_sign, seed),
        check_octant_identity(variant),
        check_law_of_cosines(rng),
        check_invariance(seed),
    ]


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    return "\n".join(lines)
