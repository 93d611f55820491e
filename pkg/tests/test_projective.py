from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpg.projective import (
    ProjectiveError,
    ProjectiveMap,
    ProjectivePoint,
    ProjectiveSubspace,
    affine_embed,
    apply_map,
    cross_ratio,
    kernel_and_range,
    limit_of_sequence,
    normalize_matrix,
)


def test_points():
    p = ProjectivePoint.from_affine([F(1), F(2)])
    assert p.exact and p.dim == 2
    assert p == ProjectivePoint(np.array([2, 4, 2], dtype=object))
    assert ProjectivePoint.at_infinity([1.0, 0.0]).is_at_infinity()
    assert np.allclose(ProjectivePoint(np.array([2.0, 4.0, 2.0])).affine(), [1, 2])
    with pytest.raises(ProjectiveError):
        ProjectivePoint(np.zeros(3))
    with pytest.raises(ProjectiveError):
        ProjectivePoint.at_infinity([1.0, 0.0]).affine()
    assert np.allclose(ProjectivePoint(np.array([1.0, -4.0, 2.0])).normalized().coords, [-0.25, 1, -0.5])


def test_cross_ratio_values():
    # |s2-p1||s1-p2| / (|s2-p2||s1-p1|) with s1=0, s2=1, p1=1/4, p2=1/2
    assert cross_ratio(0.0, 1.0, 0.25, 0.5) == pytest.approx(3.0)
    # an endpoint at infinity drops out of the ratio
    inf = ProjectivePoint(np.array([1.0, 0.0]))
    assert cross_ratio(ProjectivePoint(np.array([0.0, 1.0])), inf, ProjectivePoint(np.array([1.0, 1.0])), ProjectivePoint(np.array([2.0, 1.0]))) == pytest.approx(2.0)
    with pytest.raises(ProjectiveError):
        cross_ratio(1.0, 1.0, 0.2, 0.3)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=4, max_size=4, unique=True),
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
)
def test_cross_ratio_projective_invariance(xs, m):
    xs = sorted(xs)
    if min(np.diff(xs)) < 1e-2:
        return
    M = np.array([[m[0], m[1]], [m[2], m[3]]])
    if abs(np.linalg.det(M)) < 0.1:
        return
    pts = [ProjectivePoint(np.array([x, 1.0])) for x in xs]
    imgs = [ProjectivePoint(M @ p.coords) for p in pts]
    a = cross_ratio(pts[0], pts[3], pts[1], pts[2])
    b = cross_ratio(imgs[0], imgs[3], imgs[1], imgs[2])
    assert b == pytest.approx(a, rel=1e-7)


def test_subspaces():
    line = ProjectiveSubspace(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]), 2)  # the x-axis
    assert line.dim == 1 and not line.at_infinity()
    assert line.contains(np.array([3.0, 0.0, 1.0])) and not line.contains(np.array([0.0, 1.0, 1.0]))
    p, dirs = line.affine_part()
    assert np.allclose(p, [0, 0]) and np.allclose(np.abs(dirs), [[1, 0]])
    assert np.allclose(np.abs(line.infinity_part()), [[1, 0]])
    horizon = ProjectiveSubspace(np.array([[1, 0, 0], [0, 1, 0]], dtype=object), 2)
    assert horizon.exact and horizon.at_infinity() and horizon.affine_part() is None
    assert ProjectiveSubspace.empty(2).is_empty()


def test_maps_rank_kernel_range():
    f = ProjectiveMap(np.diag([1.0, 0.0, 0.0]))
    assert f.rank == 1 and f.is_singular()
    K, R = kernel_and_range(f)
    assert K.dim == 1 and R.dim == 0
    assert K.contains(np.array([0.0, 1.0, 0.0])) and K.contains(np.array([0.0, 0.0, 1.0]))
    assert R.contains(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ProjectiveError):
        apply_map(f, ProjectivePoint(np.array([0.0, 1.0, 1.0])))
    g = ProjectiveMap(np.array([[1, 2, 0], [0, 1, 0], [0, 0, 1]], dtype=object))
    assert g.exact and not g.is_singular() and g.is_affine()
    assert g @ g.inverse() == ProjectiveMap(np.eye(3, dtype=int).astype(object))
    K, R = kernel_and_range(g)
    assert K.is_empty() and R.is_empty()


def test_affine_embed():
    T = affine_embed([[2, 0], [0, 3]], [1, -1])
    assert T.is_affine() and T.exact
    y = apply_map(T, ProjectivePoint.from_affine([F(1), F(1)]))
    assert list(y.affine()) == [3, 2]
    with pytest.raises(ProjectiveError):
        affine_embed([[1, 0], [0, 1]], [1, 2, 3])


def test_normalize_matrix_scale_and_sign():
    M = np.array([[0.0, 2.0], [1.0, 3.0]])
    N = normalize_matrix(M)
    assert np.linalg.norm(N) == pytest.approx(1.0)
    assert np.allclose(normalize_matrix(-7.5 * M), N)
    assert N[0, 1] > 0
    with pytest.raises(ProjectiveError):
        normalize_matrix(np.zeros((2, 2)))


def test_limit_of_sequence():
    lim = limit_of_sequence(lambda k: np.diag([1.0, 2.0**-k, 1.0]), 60)
    assert lim.converged and lim.map.rank == 2
    assert lim.map == ProjectiveMap(np.diag([1.0, 0.0, 1.0]))
    assert lim.kernel.at_infinity() and lim.kernel.contains(np.array([0.0, 1.0, 0.0]))
    slow = limit_of_sequence(lambda k: np.diag([1.0, 1.0 / k, 1.0]), 60)
    assert not slow.converged and slow.map.rank == 3
    with pytest.raises(ProjectiveError):
        limit_of_sequence([np.eye(2)] * 3, 5)
