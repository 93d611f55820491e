from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpg import catalog
from cpg.domains import (
    INF,
    AffineImage,
    Ball,
    DomainError,
    HPoly,
    LorentzCone,
    Membership,
    Paraboloid,
    Product,
    ProjectiveImage,
    domain_from_json,
    halfspace,
    simplex_cone,
    space,
)

I, B, O = Membership.INTERIOR, Membership.BOUNDARY, Membership.OUTSIDE
SQUARE = HPoly(((1, 0), (-1, 0), (0, 1), (0, -1)), (1, 0, 1, 0))


@pytest.mark.parametrize(
    "D, x, expected",
    [
        (Paraboloid(2), [0, 1], I),
        (Paraboloid(2), [F(1, 2), F(1, 4)], B),
        (Paraboloid(2), [0, -1], O),
        (Ball(2), [F(3, 5), F(4, 5)], B),
        (Ball(2), [0.1, 0.2], I),
        (LorentzCone(3), [2, 1, 1], I),
        (LorentzCone(3), [-2, 1, 1], O),
        (LorentzCone(3), [0, 0, 0], B),
        (SQUARE, [1, F(1, 2)], B),
        (SQUARE, [F(1, 2), F(1, 2)], I),
        (Product((Paraboloid(2), halfspace(1))), [0, 0, 1], B),
        (Product((Paraboloid(2), halfspace(1))), [0, 1, 1], I),
        (space(2), [5, -7], I),
    ],
)
def test_membership(D, x, expected):
    assert D.contains(x) == expected


def test_affine_image_membership_is_exact():
    D = AffineImage(((2, 0), (1, 1)), (1, 0), Paraboloid(2))
    # image of the boundary point (1, 1) is (3, 2)
    assert D.contains([3, 2]) == B
    assert D.contains([F(3, 1) + F(1, 10**12), 2]) != B
    with pytest.raises(DomainError):
        AffineImage(((1, 1), (1, 1)), (0, 0), Paraboloid(2))


def test_boundary_hit_and_exits():
    P = Paraboloid(2)
    hit = P.boundary_hit([0.0, 1.0], [1.0, 0.0])
    assert hit.finite and hit.t == pytest.approx(1.0) and np.allclose(hit.hit, [1, 1])
    up = P.boundary_hit([0.0, 1.0], [0.0, 1.0])
    assert not up.finite and up.hit.is_at_infinity()
    assert P._exit(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == INF


@pytest.mark.parametrize("name", ["parabola", "ball2", "quadrant", "paraboloid3", "elliptic-cone3", "parabola-x-rplus", "tetrahedron"])
def test_vectorized_exits_match_scalar(name):
    D = catalog.get(name).domain
    rng = np.random.default_rng(1)
    X = D.sample_interior(rng, 40)
    U = rng.standard_normal(X.shape)
    U /= np.linalg.norm(U, axis=1)[:, None]
    fast = D.exits(X, U)
    slow = np.array([float(D._exit(x, u)) for x, u in zip(X, U)])
    assert np.array_equal(np.isinf(fast), np.isinf(slow))
    fin = np.isfinite(slow)
    assert np.allclose(fast[fin], slow[fin], rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("name", catalog.names())
def test_sampling_stays_in_domain(name):
    D = catalog.get(name).domain
    rng = np.random.default_rng(3)
    X = D.sample_interior(rng, 50)
    assert np.all(D.contains_many(X) == 0)
    try:
        Bd = D.sample_boundary(rng, 20)
    except DomainError:
        assert D.lineality().shape[0] == D.n  # only R^n has no boundary
        return
    assert np.all(D.contains_many(Bd) == 1)


@pytest.mark.parametrize("name", catalog.names())
def test_json_round_trip(name):
    D = catalog.get(name).domain
    assert domain_from_json(D.to_json()) == D


def test_json_inputs():
    D = domain_from_json({"type": "hpoly", "A": [["-1", 0], [0, [-1, 1]]], "b": [0, "0.0"]})
    assert D == simplex_cone(2)
    A = domain_from_json({"type": "affine_image", "linear": [[1, 0], [0, 2]], "translation": [0, 1], "base": {"type": "paraboloid", "n": 2}})
    assert A.contains([0, 2]) == I
    for bad in [{"type": "torus"}, {"type": "ball"}, [1, 2], {"type": "hpoly", "A": [[1]], "b": ["x"]}]:
        with pytest.raises(DomainError):
            domain_from_json(bad)


@pytest.mark.parametrize(
    "name, lineality, bounded",
    [("plane2", 2, 0), ("half-plane2", 1, 0), ("parabola-x-r", 1, 0), ("quadrant", 0, 0), ("ball2", 0, 2), ("square", 0, 2)],
)
def test_lineality_and_bounded_directions(name, lineality, bounded):
    D = catalog.get(name).domain
    assert D.lineality().shape[0] == lineality
    assert D.bounded_directions().shape[0] == bounded


def test_faces():
    D = catalog.get("parabola-x-rplus").domain
    F1 = D.face_of([0.0, 0.0, 1.0])
    assert F1.dim == 1 and not F1.bounded and F1.support_contains([0, 0, 7])
    F2 = D.face_of([0.5, 2.0, 0.0])
    assert F2.dim == 2 and not F2.bounded
    assert D.face_of([0.0, 0.0, 0.0]).dim == 0
    edge = SQUARE.face_of([0.5, 0.0])
    assert edge.dim == 1 and edge.bounded
    assert SQUARE.face_of([0.0, 0.0]).dim == 0
    assert Paraboloid(3).face_of([1.0, 0.0, 1.0]).dim == 0
    with pytest.raises(DomainError):
        SQUARE.face_of([0.5, 0.5])


def test_bounded_face_info():
    assert SQUARE.bounded_face_info().positive and SQUARE.bounded_face_info().whole_bounded
    q = simplex_cone(2).bounded_face_info()
    assert q.vertex and not q.positive


def test_projective_image_of_ball():
    T = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.0, 1.0]])
    E = ProjectiveImage(T, Ball(2))
    x = np.array([0.3, -0.2])
    assert E.contains(E.push(x)) == I
    assert np.allclose(E.pull(E.push(x)), x)
    assert E.contains(E.push(np.array([1.0, 0.0]))) == B
    with pytest.raises(DomainError):
        ProjectiveImage(np.zeros((3, 3)), Ball(2))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4), st.lists(st.integers(-3, 3), min_size=2, max_size=2),
       st.lists(st.fractions(-3, 3, max_denominator=8), min_size=2, max_size=2))
def test_affine_image_pullback_property(L, a, y):
    # y is in A(D) exactly when A^{-1} y is in D
    M = ((L[0], L[1]), (L[2], L[3]))
    if L[0] * L[3] - L[1] * L[2] == 0:
        return
    D = AffineImage(M, tuple(a), Paraboloid(2))
    det = F(L[0] * L[3] - L[1] * L[2])
    z = [y[0] - a[0], y[1] - a[1]]
    x = [(L[3] * z[0] - L[1] * z[1]) / det, (-L[2] * z[0] + L[0] * z[1]) / det]
    assert D.contains(y) == Paraboloid(2).contains(x)
