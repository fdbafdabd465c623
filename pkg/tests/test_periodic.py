import math

import numpy as np
import pytest

from curvebill import make_family
from curvebill.billiard import PhasePoint, d3_finite_difference, d3_jacobi, iterate
from curvebill.errors import CornerHit, DomainError
from curvebill.periodic import (
    Classification,
    classify_theorem2,
    compatibility_report,
    entry_identity_check,
    find_3period,
    grad_perimeter,
    perimeter,
    same_triangle,
    vertex_angles,
)

CIRCLES = [
    "geodesic_circle:kappa=0,r=1",
    "geodesic_circle:kappa=-1,r=1",
    "geodesic_circle:kappa=1,r=1",
]
FOURIER_H2 = "fourier_perturbed_circle:kappa=-1,r=1,amplitudes=0;0.04;0.02"


def fd_grad(b, s, h=1e-6):
    g = np.empty(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        g[j] = (perimeter(b, *(s + e)) - perimeter(b, *(s - e))) / (2 * h)
    return g


@pytest.mark.parametrize("spec", CIRCLES + [FOURIER_H2, "ellipse_euclidean:a=1.2,b=1.0",
                                            "octant_s2"])
def test_gradient_matches_finite_differences(spec):
    b = make_family(spec)
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 30:
        s = np.sort(rng.random(3)) * b.total_length
        try:
            g = grad_perimeter(b, *s)
        except (CornerHit, DomainError):
            continue
        assert np.allclose(g, fd_grad(b, s), atol=1e-6)
        checked += 1


def test_euclidean_circle_equilateral():
    b = make_family(CIRCLES[0])
    orbits = find_3period(b, 10, seed=0)
    assert orbits
    for o in orbits:
        assert np.allclose(o.angles, math.pi / 3, atol=1e-8)
        assert o.perimeter == pytest.approx(3 * math.sqrt(3), abs=1e-8)
        assert o.degenerate
        rep = compatibility_report(b, o)
        assert np.allclose(rep.residuals, 0.75, atol=1e-9)
        assert rep.classification == Classification.DEGENERATE


def brute_force_residual(kappa, r):
    # equilateral triangle inscribed in a geodesic circle: isosceles
    # center-vertex-vertex triangles with apex angle 2pi/3
    c = math.cos(2 * math.pi / 3)
    if kappa < 0:
        y = math.acosh(math.cosh(r) ** 2 - math.sinh(r) ** 2 * c)
        cb = math.cosh(r) * (math.cosh(y) - 1) / (math.sinh(r) * math.sinh(y))
        return 1 / math.tanh(r) - cb**3 / math.tanh(1.5 * y), 3 * y
    y = math.acos(math.cos(r) ** 2 + math.sin(r) ** 2 * c)
    cb = math.cos(r) * (1 - math.cos(y)) / (math.sin(r) * math.sin(y))
    return math.cos(r) / math.sin(r) - cb**3 * math.cos(1.5 * y) / math.sin(1.5 * y), 3 * y


@pytest.mark.parametrize("kappa", [-1, 1])
def test_circle_residual_brute_force(kappa):
    b = make_family("geodesic_circle", kappa=kappa, r=1.0)
    expected, L = brute_force_residual(kappa, 1.0)
    orbits = find_3period(b, 6, seed=1)
    assert orbits
    for o in orbits:
        assert o.perimeter == pytest.approx(L, abs=1e-9)
        assert np.allclose(compatibility_report(b, o).residuals, expected, atol=1e-9)


def test_octant_residuals_vanish(octant):
    o = iterate(octant, PhasePoint(0.5, 1.2), 3)
    rep = compatibility_report(octant, o)
    assert rep.orbit.perimeter == pytest.approx(math.pi, abs=1e-10)
    assert np.allclose(rep.residuals, 0.0, atol=1e-9)
    assert rep.classification == Classification.SPHERICAL_SPECIAL_CANDIDATE


def test_octant_search_and_classification(octant):
    orbits = find_3period(octant, 10, seed=2)
    assert orbits
    reports = [compatibility_report(octant, o) for o in orbits]
    summary = classify_theorem2(reports)
    assert summary["counts"][Classification.SPHERICAL_SPECIAL_CANDIDATE.value] == len(orbits)
    assert summary["all_special_orthogonal"]
    for r in reports:
        assert np.allclose(r.residuals, 0.0, atol=1e-9)


def test_fourier_orbits_are_isolated():
    b = make_family(FOURIER_H2)
    orbits = find_3period(b, 12, seed=0)
    assert orbits
    for o in orbits:
        assert not o.degenerate
        rep = compatibility_report(b, o)
        assert rep.classification == Classification.GENERIC_ISOLATED
        assert np.allclose(vertex_angles(b, o.vertices), o.angles, atol=1e-8)
        tj = np.trace(d3_jacobi(b, o))
        tf = np.trace(d3_finite_difference(b, o.start))
        assert tj == pytest.approx(tf, rel=1e-4, abs=1e-4)


@pytest.mark.parametrize("spec", CIRCLES + [FOURIER_H2])
def test_entry_identity_along_orbits(spec):
    b = make_family(spec)
    for o in find_3period(b, 4, seed=0):
        m, c = entry_identity_check(b, o)
        assert m == pytest.approx(c, abs=1e-10)


def test_search_is_reproducible_and_deduplicated():
    b = make_family(FOURIER_H2)
    a = find_3period(b, 8, seed=5)
    c = find_3period(b, 8, seed=5)
    assert [o.vertices for o in a] == [o.vertices for o in c]
    for i in range(len(a)):
        for j in range(i):
            assert not same_triangle(b.total_length, a[i].vertices, a[j].vertices)


def test_same_triangle_symmetries():
    assert same_triangle(10.0, [1, 4, 7], [4, 7, 1])
    assert same_triangle(10.0, [1, 4, 7], [7, 4, 1])
    assert same_triangle(10.0, [0.0, 4, 7], [9.9999999, 4, 7])
    assert not same_triangle(10.0, [1, 4, 7], [1, 4, 8])


def test_perimeter_rejects_coincident_vertices():
    b = make_family(CIRCLES[0])
    with pytest.raises(DomainError):
        perimeter(b, 1.0, 1.0, 2.0)
