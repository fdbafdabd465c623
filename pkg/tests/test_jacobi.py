import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvebill import jacobi, make_family
from curvebill.billiard import PhasePoint, d3_finite_difference, next_collision
from curvebill.errors import DomainError, GrazingReflection
from curvebill.surface import Curvature

kappas = st.sampled_from(list(Curvature))
taus = st.floats(-3, 3)


@settings(max_examples=300, deadline=None)
@given(kappas, taus, taus)
def test_group_law(kappa, a, b):
    P = lambda t: jacobi.evolution(kappa, t)  # noqa: E731
    scale = np.abs(P(abs(a) + abs(b))).max()
    assert np.linalg.det(P(a)) == pytest.approx(1.0, abs=1e-12 * scale**2)
    assert np.allclose(P(a) @ P(b), P(a + b), atol=1e-12 * scale, rtol=0)
    assert np.allclose(np.linalg.inv(P(a)), P(-a), atol=1e-12 * scale, rtol=0)


@settings(max_examples=100, deadline=None)
@given(kappas, st.floats(0, 3))
def test_evolution_solves_jacobi_equation(kappa, t):
    # d/dt P = [[0, 1], [-kappa, 0]] P
    h = 1e-6
    dP = (jacobi.evolution(kappa, t + h) - jacobi.evolution(kappa, t - h)) / (2 * h)
    A = np.array([[0.0, 1.0], [-float(kappa), 0.0]])
    assert np.allclose(dP, A @ jacobi.evolution(kappa, t), atol=1e-7 * math.cosh(t))


def test_printed_variant_breaks_group_law():
    P = lambda t: jacobi.evolution(1, t, jacobi.PRINTED)  # noqa: E731
    assert abs(np.linalg.det(P(0.7)) - 1) > 0.1
    with pytest.raises(DomainError):
        jacobi.evolution(1, 0.1, "bogus")


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(0.01, math.pi - 0.01))
def test_reflection(k, phi):
    R = jacobi.reflection(k, phi)
    assert np.linalg.det(R) == pytest.approx(1.0)
    assert R[1, 0] == pytest.approx(2 * k / math.sin(phi))


def test_reflection_grazing():
    with pytest.raises(GrazingReflection):
        jacobi.reflection(1.0, 0.0)


def test_f_of_l_spot_values():
    assert jacobi.f_of_l(0, 2.0) == 1.0
    assert abs(jacobi.f_of_l(1, math.pi)) < 1e-12
    assert jacobi.f_of_l(-1, 2.0) == pytest.approx(1 / math.tanh(1.0), abs=1e-12)
    with pytest.raises(DomainError):
        jacobi.f_of_l(1, 2 * math.pi)
    with pytest.raises(DomainError):
        jacobi.f_of_l(0, 0.0)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([Curvature.HYPERBOLIC, Curvature.SPHERICAL, Curvature.EUCLIDEAN]),
       st.lists(st.floats(0.05, 2.5), min_size=3, max_size=3),
       st.lists(st.floats(0.1, math.pi - 0.1), min_size=3, max_size=3),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_top_right_entry_identity(kappa, sides, phis, ks):
    x, y, z = sides
    m = jacobi.top_right_mismatch(kappa, x, y, z, *phis, *ks)
    c = jacobi.top_right_closed_form(kappa, x, y, z, phis[1], ks[1])
    assert m == pytest.approx(c, abs=1e-10 * max(1.0, abs(c)))


def test_top_right_printed_variant_fails():
    args = (1.0, 0.8, 1.3, 1.0, 1.2, 0.9, 0.5, 0.3, 0.7)
    m = jacobi.top_right_mismatch(1, *args, variant=jacobi.PRINTED)
    c = jacobi.top_right_closed_form(1, 1.0, 0.8, 1.3, 1.2, 0.3)
    assert abs(m - c) > 1e-3


def test_cycle_product_matches_three_bounce():
    sides, angles, ks = (0.9, 1.1, 1.4), (1.0, 1.3, 0.8), (0.2, 0.5, 0.9)
    x, z, y = sides
    full = jacobi.three_bounce_product(-1, x, y, z, *angles, *ks)
    # the three-bounce product starts just before vertex 2
    cyc = jacobi.cycle_product(-1, (sides[2], sides[0], sides[1]),
                               (angles[2], angles[0], angles[1]), (ks[2], ks[0], ks[1]))
    assert np.allclose(full, cyc, atol=1e-13)


@pytest.mark.parametrize("spec,start", [
    ("ellipse_euclidean:a=1.2,b=1.0", (0.3, 1.1)),
    ("fourier_perturbed_circle:kappa=-1,r=1,amplitudes=0;0.04;0.02", (1.0, 0.7)),
    ("fourier_perturbed_circle:kappa=1,r=0.8,amplitudes=0.05;0;0.03", (2.0, 2.2)),
])
def test_phase_to_jacobi_conjugates_one_bounce(spec, start):
    b = make_family(spec)
    p0 = PhasePoint(*start)
    p1, tau = next_collision(b, p0)
    A0 = jacobi.phase_to_jacobi(p0.phi, b.geodesic_curvature(p0.s))
    A1 = jacobi.phase_to_jacobi(p1.phi, b.geodesic_curvature(p1.s))
    k1 = b.geodesic_curvature(p1.s)
    dT = np.linalg.inv(A1) @ jacobi.reflection(k1, p1.phi) @ jacobi.evolution(b.kappa, tau) @ A0
    fd = d3_finite_difference(b, p0, period=1)
    assert np.allclose(dT, fd, atol=1e-8)
