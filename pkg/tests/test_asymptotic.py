import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpg import catalog
from cpg.asymptotic import (
    FoliationError,
    base_point,
    check_asymptotic_cone,
    extreme_decomposition,
    flow,
    foliation_chart,
    verify_foliation,
)
from cpg.geometry import homogenize

# dimension of the span of the asymptotic cone, lineality included
AC_SPAN = {
    "plane2": 2, "half-plane2": 2, "quadrant": 2, "parabola": 1,
    "space3": 3, "half-space3": 3, "parabola-x-r": 2, "quadrant-x-r": 3, "parabola-x-rplus": 2,
    "paraboloid3": 1, "simplex-cone3": 3, "elliptic-cone3": 3,
    "space4": 4, "half-space4": 4, "parabola-x-r2": 3, "quadrant-x-r2": 4, "paraboloid3-x-r": 2,
    "parabola-x-rplus-x-r": 3, "elliptic-cone3-x-r": 4, "elliptic-cone4": 4,
    "ball2": 0, "interval": 0, "hyperbola": 2, "paraboloid4": 1, "simplex-cone4": 4, "square": 0, "tetrahedron": 0,
}


@pytest.mark.parametrize("name", sorted(AC_SPAN))
def test_cone_dimension(name):
    cone = catalog.get(name).domain.asymptotic_cone()
    assert cone.span_basis().shape[0] == AC_SPAN[name]


def test_cone_membership():
    cone = catalog.get("parabola").domain.asymptotic_cone()
    assert cone.contains(np.array([0.0, 1.0])) and not cone.contains(np.array([1.0, 1.0]))
    cone = catalog.get("parabola-x-rplus").domain.asymptotic_cone()
    assert cone.contains(np.array([0.0, 2.0, 3.0])) and not cone.contains(np.array([0.0, 1.0, -1.0]))
    cone = catalog.get("elliptic-cone3").domain.asymptotic_cone()
    assert cone.contains(np.array([2.0, 1.0, 1.0])) and not cone.contains(np.array([1.0, 1.0, 1.0]))


@pytest.mark.parametrize("name", ["parabola", "quadrant-x-r", "elliptic-cone3", "square", "plane2", "hyperbola"])
def test_definitional_check(name):
    rep = check_asymptotic_cone(catalog.get(name).domain, 100, 100, seed=5)
    assert rep.passed and rep.inside_violations == 0 and rep.outside_violations == 0


def test_definitional_check_exact_for_polyhedra():
    assert check_asymptotic_cone(catalog.get("quadrant").domain, 50, 50).exact_match is True
    assert check_asymptotic_cone(catalog.get("parabola").domain, 50, 50).exact_match is None
    assert check_asymptotic_cone(catalog.get("plane2").domain, 20, 20).outside_trials == 0


@pytest.mark.parametrize(
    "name, x, apex",
    [
        ("paraboloid3", [0.1, 0.2, 1.0], [0.1, 0.2, 0.05]),
        ("parabola", [1.0, 3.0], [1.0, 1.0]),
        ("parabola-x-rplus", [1.0, 2.0, 3.0], [1.0, 1.0, 0.0]),
        ("quadrant-x-r", [1.0, 2.0, 3.0], [0.0, 0.0, 3.0]),
        ("elliptic-cone3", [2.0, 1.0, 0.5], [0.0, 0.0, 0.0]),
        ("simplex-cone3", [1.0, 2.0, 3.0], [0.0, 0.0, 0.0]),
    ],
)
def test_base_points(name, x, apex):
    assert np.allclose(base_point(foliation_chart(catalog.get(name).domain), x), apex, atol=1e-12)


def test_rejections():
    with pytest.raises(FoliationError, match="no apex strategy"):
        base_point(foliation_chart(catalog.get("hyperbola").domain), [1.0, 2.0])
    with pytest.raises(FoliationError, match="trivial"):
        base_point(foliation_chart(catalog.get("ball2").domain), [0.0, 0.0])
    rep = verify_foliation(foliation_chart(catalog.get("hyperbola").domain), 20)
    assert rep.flagged and not rep.passed


@pytest.mark.parametrize("name", ["parabola-x-rplus", "quadrant-x-r", "paraboloid3", "simplex-cone3", "parabola"])
def test_foliation_holds(name):
    rep = verify_foliation(foliation_chart(catalog.get(name).domain), 200, seed=2)
    assert rep.passed and rep.max_violation <= 1e-8


def test_flow_values():
    chart = foliation_chart(catalog.get("paraboloid3").domain)
    y = flow(chart, [0.1, 0.2, 1.0], 1.0)
    assert np.allclose(y, [0.1, 0.2, 0.05 + math.e * 0.95])
    assert np.allclose(flow(chart, [0.1, 0.2, 1.0], 0.0), [0.1, 0.2, 1.0])


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(0.01, 5), st.floats(0.2, 4), st.floats(-3, 3))
def test_flow_commutes_with_parabola_scalings(x, h, s, t):
    chart = foliation_chart(catalog.get("parabola").domain)
    p = np.array([x, x * x + h])
    g = lambda v: np.array([s * v[0], s * s * v[1]])
    assert np.allclose(flow(chart, g(p), t), g(flow(chart, p, t)), rtol=1e-9, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(0.01, 5), st.floats(0, 3), st.floats(0, 3))
def test_flow_semigroup(x, h, a, b):
    chart = foliation_chart(catalog.get("parabola").domain)
    p = np.array([x, x * x + h])
    lhs = flow(chart, flow(chart, p, a), b)
    rhs = flow(chart, p, a + b)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_homogenization_meets_infinity_in_the_cone():
    D = catalog.get("parabola").domain
    H = homogenize(D)
    cone = D.asymptotic_cone()
    rng = np.random.default_rng(0)
    for u in rng.standard_normal((200, 2)):
        assert H.closure_contains(np.append(u, 0.0)) == cone.contains(u)


def test_extreme_decomposition():
    rep = extreme_decomposition(catalog.get("parabola").domain, 50)
    assert rep.verdict and not rep.failures
    assert len(rep.E_inf) == 1 and rep.E_inf[0].is_at_infinity()
