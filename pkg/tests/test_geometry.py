import numpy as np
import pytest

from cpg import catalog
from cpg.domains import Ball, DomainError, Membership, Paraboloid
from cpg.geometry import (
    classify_convexity,
    convex_hull,
    convex_sum,
    is_conic_face,
    lineality_space,
    osculating_ellipsoid_test,
)


def test_convexity_flags():
    assert classify_convexity(catalog.get("parabola").domain) == (True, True)
    assert classify_convexity(catalog.get("quadrant").domain) == (True, False)
    assert classify_convexity(catalog.get("parabola-x-r").domain) == (False, False)
    assert classify_convexity(catalog.get("plane2").domain) == (False, False)
    assert lineality_space(catalog.get("quadrant-x-r2").domain).k == 2


def test_simplex_faces_are_conic():
    D = catalog.get("simplex-cone3").domain
    v = is_conic_face(D, D.face_of([0.0, 0.0, 0.0]))
    assert v.conic and len(v.chain) == 3
    edge = is_conic_face(D, D.face_of([0.0, 0.0, 2.0]))
    assert edge.conic and len(edge.chain) == 2
    T = catalog.get("tetrahedron").domain
    for p in ([0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.2, 0.2, 0.6], [1 / 3, 1 / 3, 1 / 3]):
        assert is_conic_face(T, T.face_of(p))


def test_non_conic_faces():
    D = catalog.get("parabola-x-rplus").domain
    z_axis = D.face_of([0.0, 0.0, 1.0])
    v = is_conic_face(D, z_axis)
    assert not v.conic and v.chain == [] and (v.normal_span_dim, v.needed) == (1, 2)
    assert is_conic_face(D, D.face_of([0.3, 1.0, 0.0])).conic  # the bottom facet
    P = catalog.get("parabola").domain
    assert not is_conic_face(P, P.face_of([1.0, 1.0]))
    with pytest.raises(DomainError):
        is_conic_face(P, catalog.get("quadrant").domain.face_of([0.0, 1.0]))


def test_osculating_forms():
    r = osculating_ellipsoid_test(Paraboloid(3), [0.0, 0.0, 0.0])
    assert r.osculating and np.allclose(r.form, np.eye(2), atol=1e-6)
    # the unit circle near (1, 0) is x = 1 - y^2 / 2 + ...
    r = osculating_ellipsoid_test(Ball(2), [1.0, 0.0])
    assert r.osculating and np.allclose(np.abs(r.form), [[0.5]], atol=1e-6)
    assert r.disagreement <= 1e-4


def test_osculating_fails_at_corners_and_flats():
    assert osculating_ellipsoid_test(catalog.get("square").domain, [0.0, 0.0]).reason == "corner"
    flat = osculating_ellipsoid_test(catalog.get("square").domain, [0.5, 0.0])
    assert not flat.osculating
    cyl = osculating_ellipsoid_test(catalog.get("parabola-x-r").domain, [0.0, 0.0, 0.0])
    assert not cyl.osculating and cyl.reason == "degenerate"


def test_convex_hull():
    H = convex_hull([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]])
    assert H == catalog.get("square").domain or H.m == 4
    assert H.contains([0.5, 0.5]) == Membership.INTERIOR
    assert H.contains([1, 0.5]) == Membership.BOUNDARY
    with pytest.raises(DomainError):
        convex_hull([[0, 0], [1, 1], [2, 2]])


def test_convex_sum_of_two_segments_is_a_tetrahedron():
    S = convex_sum(
        Ball(1), Ball(1),
        ((np.array([[1.0], [0.0], [0.0]]), np.zeros(3)), (np.array([[0.0], [1.0], [0.0]]), np.array([0.0, 0.0, 1.0]))),
    )
    H = convex_hull([[1, 0, 0], [-1, 0, 0], [0, 1, 1], [0, -1, 1]])
    rng = np.random.default_rng(0)
    X = rng.uniform(-1.2, 1.2, (400, 3))
    g = H.values(X)
    far = np.abs(g) > 1e-6
    assert np.array_equal(S.contains_many(X[far]), H.contains_many(X[far]))
    assert S.contains([0.0, 0.0, 0.5]) == Membership.INTERIOR
