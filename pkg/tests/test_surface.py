import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvebill import surface as sf
from curvebill.errors import DomainError
from curvebill.surface import (
    Curvature,
    SurfacePoint,
    UnitTangent,
    angle_between,
    distance,
    geodesic_flow,
    law_of_cosines_side,
)

kappas = st.sampled_from(list(Curvature))
angles = st.floats(0, 2 * math.pi)
lengths = st.floats(0.01, 2.5)


def unit_tangent_at(kappa, rho, theta, alpha):
    p = sf.polar_point(kappa, rho, theta)
    e1, e2 = sf.frame(kappa)
    v = sf.project_tangent(kappa, p, math.cos(alpha) * e1 + math.sin(alpha) * e2)
    if np.linalg.norm(v) < 1e-3:
        v = sf.project_tangent(kappa, p, e2 + 0.5 * e1)
    return p, sf.normalize_tangent(kappa, p, v)


def test_coerce():
    assert Curvature.coerce("S2") is Curvature.SPHERICAL
    assert Curvature.coerce(-1) is Curvature.HYPERBOLIC
    assert Curvature.coerce("e2") is Curvature.EUCLIDEAN
    with pytest.raises(DomainError):
        Curvature.coerce(2)


@settings(max_examples=200, deadline=None)
@given(kappas, st.floats(0, 1.2), angles, angles, st.floats(-3, 3))
def test_flow_stays_on_surface(kappa, rho, theta, alpha, t):
    p, v = unit_tangent_at(kappa, rho, theta, alpha)
    q, w = sf.flow(kappa, p, v, t)
    if kappa != Curvature.EUCLIDEAN:
        assert abs(sf.inner(kappa, q, q) - kappa) < 1e-9 * max(1.0, math.cosh(t) ** 2)
        assert abs(sf.inner(kappa, q, w)) < 1e-9 * max(1.0, math.cosh(t) ** 2)
    assert abs(sf.inner(kappa, w, w) - 1) < 1e-9 * max(1.0, math.cosh(t) ** 2)


@settings(max_examples=200, deadline=None)
@given(kappas, st.floats(0, 1.2), angles, angles, st.floats(0.01, 3.0))
def test_flow_is_unit_speed(kappa, rho, theta, alpha, t):
    p, v = unit_tangent_at(kappa, rho, theta, alpha)
    q, _ = sf.flow(kappa, p, v, t)
    assert float(sf.dist(kappa, p, q)) == pytest.approx(t, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(kappas, st.floats(0, 1.2), angles, angles, st.floats(0.01, 2.0))
def test_direction_to_inverts_flow(kappa, rho, theta, alpha, t):
    p, v = unit_tangent_at(kappa, rho, theta, alpha)
    q, _ = sf.flow(kappa, p, v, t)
    u, d = sf.direction_to(kappa, p, q)
    assert float(d) == pytest.approx(t, abs=1e-9)
    assert np.allclose(u, v, atol=1e-7)


@settings(max_examples=100, deadline=None)
@given(kappas, st.floats(0.01, 1.4), angles)
def test_polar_round_trip(kappa, rho, theta):
    p = sf.polar_point(kappa, rho, theta)
    r, th = sf.polar_coords(kappa, p)
    assert float(r) == pytest.approx(rho, abs=1e-10)
    assert math.cos(float(th) - theta) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(kappas, st.floats(0, 1.2), angles, angles)
def test_left_normal_is_unit_and_left(kappa, rho, theta, alpha):
    p, t = unit_tangent_at(kappa, rho, theta, alpha)
    n = sf.left_normal(kappa, p, t)
    assert abs(sf.inner(kappa, n, n) - 1) < 1e-12
    assert abs(sf.inner(kappa, n, t)) < 1e-12
    # at the origin the left normal is the tangent rotated by +90 degrees
    p0 = sf.origin(kappa)
    e1, e2 = sf.frame(kappa)
    assert np.allclose(sf.left_normal(kappa, p0, e1), e2)


@settings(max_examples=300, deadline=None)
@given(kappas, lengths, lengths, st.floats(0.05, math.pi - 0.05))
def test_law_of_cosines_matches_construction(kappa, x, z, theta):
    p = sf.origin(kappa)
    e1, e2 = sf.frame(kappa)
    a, _ = sf.flow(kappa, p, e1, x)
    c, _ = sf.flow(kappa, p, math.cos(theta) * e1 + math.sin(theta) * e2, z)
    assert law_of_cosines_side(x, z, theta, kappa) == pytest.approx(
        float(sf.dist(kappa, a, c)), abs=1e-10)


def test_law_of_cosines_euclidean_right_angle():
    assert law_of_cosines_side(3.0, 4.0, math.pi / 2, 0) == pytest.approx(5.0, abs=1e-14)


def test_spherical_distance_antipodal_and_tiny():
    k = Curvature.SPHERICAL
    n = np.array([0.0, 0.0, 1.0])
    assert float(sf.dist(k, n, -n)) == pytest.approx(math.pi, abs=1e-15)
    q = np.array([1e-9, 0.0, math.sqrt(1 - 1e-18)])
    assert float(sf.dist(k, n, q)) == pytest.approx(1e-9, rel=1e-6)


def test_value_types_validate():
    with pytest.raises(DomainError):
        SurfacePoint(np.array([1.0, 1.0, 1.0]), Curvature.SPHERICAL)
    p = SurfacePoint(np.array([0.0, 0.0, 1.0]), Curvature.SPHERICAL)
    with pytest.raises(DomainError):
        UnitTangent(p, np.array([0.0, 0.0, 1.0]))
    with pytest.raises(DomainError):
        UnitTangent(p, np.array([2.0, 0.0, 0.0]))


def test_scalar_wrappers():
    k = Curvature.HYPERBOLIC
    p = SurfacePoint(sf.origin(k), k)
    e1, e2 = sf.frame(k)
    u = UnitTangent(p, e1)
    v = UnitTangent(p, e2)
    assert angle_between(u, v) == pytest.approx(math.pi / 2, abs=1e-14)
    q = geodesic_flow(u, 1.5)
    assert distance(p, q.base) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(DomainError):
        angle_between(u, q)
