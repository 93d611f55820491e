from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cpg import exact, lp, polyhedral


@pytest.mark.parametrize(
    "value, expected",
    [(3, F(3)), ("0.25", F(1, 4)), ("2/3", F(2, 3)), ([5, -10], F(-1, 2)), (0.1, F(1, 10)), (F(7, 3), F(7, 3))],
)
def test_to_fraction(value, expected):
    assert exact.to_fraction(value) == expected


@pytest.mark.parametrize("bad", [True, "abc", [1, 0]])
def test_to_fraction_rejects(bad):
    with pytest.raises((TypeError, ValueError, ZeroDivisionError)):
        exact.to_fraction(bad)


def test_rank_nullspace_inverse():
    M = exact.frac_matrix([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert exact.rank(M) == 2
    (v,) = exact.nullspace(M, 3)
    assert exact.matvec(M, v) == [0, 0, 0]
    A = exact.frac_matrix([[2, 1], [1, 1]])
    assert exact.inverse(A) == [[1, -1], [-1, 2]]
    assert exact.solve(A, [F(3), F(2)]) == [1, 1]
    with pytest.raises(ZeroDivisionError):
        exact.inverse(exact.frac_matrix([[1, 2], [2, 4]]))


def test_primitive_and_independent_rows():
    assert exact.primitive([F(0), F(-3), F(6)]) == (0, -1, 2)
    assert exact.independent_rows(exact.frac_matrix([[1, 0], [2, 0], [0, 1]])) == [0, 2]


small = st.integers(-5, 5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_property(rows):
    M = exact.frac_matrix(rows)
    if exact.rank(M) < 3:
        return
    assert exact.matmul(M, exact.inverse(M)) == exact.identity(3)


def test_lp_optimal_unbounded_infeasible():
    res = lp.maximize([1, 1], [[1, 0], [0, 1], [-1, 0], [0, -1]], [1, 2, 0, 0])
    assert res.optimal and res.value == 3 and res.x == (1, 2)
    assert lp.maximize([1, 0], [[0, 1]], [1]).status == lp.UNBOUNDED
    assert lp.maximize([1], [[1], [-1]], [-1, -1]).status == lp.INFEASIBLE
    res = lp.maximize([1, 2], A_eq=[[1, 1]], b_eq=[1], A_ub=[[-1, 0], [0, -1]], b_ub=[0, 0])
    assert res.value == 2 and res.x == (0, 1)


@settings(max_examples=30, deadline=None)
@given(st.lists(small, min_size=2, max_size=2), st.integers(1, 6))
def test_lp_box_optimum(c, r):
    # max c.x over the box [-r, r]^2 is r (|c1| + |c2|)
    A = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    res = lp.maximize(c, A, [r] * 4)
    assert res.optimal and res.value == r * (abs(c[0]) + abs(c[1]))


def test_polyhedral_square():
    A = exact.frac_matrix([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]])
    b = exact.frac_vector([1, 0, 1, 0, 5])
    assert sorted(polyhedral.vertices(A, b, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert polyhedral.irredundant_rows(A, b) == [0, 1, 2, 3]
    p = polyhedral.interior_point(A, b, 2)
    assert all(exact.dot(row, p) < bi for row, bi in zip(A, b))


def test_polyhedral_rays_and_equalities():
    A = exact.frac_matrix([[-1, 0, 0], [0, -1, 0]])  # quadrant times a line
    rays, lin = polyhedral.extreme_rays(A, 3)
    assert sorted(rays) == [(0, 1, 0), (1, 0, 0)]
    assert [list(v) for v in lin] == [[0, 0, 1]]
    assert polyhedral.cone_is_zero(exact.frac_matrix([[-1, 0], [0, -1], [1, 1]]), [], 2)
    # x <= 0 and -x <= 0 force x = 0
    assert polyhedral.implicit_equalities(exact.frac_matrix([[1, 0], [-1, 0], [0, 1]]), exact.frac_vector([0, 0, 1])) == [0, 1]
    assert polyhedral.interior_point(exact.frac_matrix([[1], [-1]]), exact.frac_vector([0, 0]), 1) is None
