import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpg import catalog
from cpg.domains import Ball, DomainError, Paraboloid, simplex_cone, space
from cpg.hilbert import (
    HilbertError,
    OrbitMetricQuery,
    PrecisionWarning,
    chord_distance,
    hilbert_distance,
    orbit_distance,
)


@pytest.mark.parametrize(
    "D, p, q, expected",
    [
        (Ball(1), [0.0], [0.5], math.log(3)),
        (Ball(2), [0.0, 0.0], [0.5, 0.0], math.log(3)),
        (Ball(2), [-0.5, 0.0], [0.5, 0.0], 2 * math.log(3)),
        # vertical chord of the parabola leaves through (0, 0) and infinity: log(4/1)
        (Paraboloid(2), [0.0, 1.0], [0.0, 4.0], math.log(4)),
        # diagonal of the quadrant runs from the origin to infinity
        (simplex_cone(2), [1.0, 1.0], [2.0, 2.0], math.log(2)),
        (simplex_cone(2), [1.0, 1.0], [1.0, 1.0], 0.0),
    ],
)
def test_known_distances(D, p, q, expected):
    assert hilbert_distance(D, p, q) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_errors():
    with pytest.raises(HilbertError):
        hilbert_distance(space(2), [0, 0], [1, 0])
    with pytest.raises(HilbertError):
        hilbert_distance(catalog.get("parabola-x-r").domain, [0, 1, 0], [0, 2, 0])
    with pytest.raises(DomainError):
        hilbert_distance(Ball(2), [0, 0], [1, 0])


def test_precision_warning():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        chord_distance(Ball(1), np.array([0.0]), np.array([1 - 1e-12]))
    assert any(issubclass(x.category, PrecisionWarning) for x in w)


def test_orbit_distance():
    P = Paraboloid(2)
    g = np.diag([2.0, 4.0, 1.0])
    res = orbit_distance(OrbitMetricQuery([g], 2, np.array([0.0, 1.0]), np.array([0.0, 4.0])), P)
    assert res.distance == pytest.approx(0.0, abs=1e-12) and res.word == "g1"
    assert res.words_examined == 1 + 2 + 2
    res0 = orbit_distance(OrbitMetricQuery([g], 0, np.array([0.0, 1.0]), np.array([0.0, 4.0])), P)
    assert res0.word == "e" and res0.distance == pytest.approx(math.log(4))
    bad = np.array([[1.0, 0.0, 5.0], [0.0, 1.0, -10.0], [0.0, 0.0, 1.0]])
    with pytest.raises(DomainError, match="does not preserve"):
        orbit_distance(OrbitMetricQuery([bad], 1, np.array([0.0, 1.0]), np.array([0.0, 2.0])), P)


def _parabola_automorphism(s: float, t: float) -> np.ndarray:
    # (x, y) -> (s x + t, s^2 y + 2 s t x + t^2) preserves {y > x^2}
    return np.array([[s, 0.0, t], [2 * s * t, s * s, t * t], [0.0, 0.0, 1.0]])


coord = st.floats(-2, 2)


@settings(max_examples=80, deadline=None)
@given(coord, st.floats(0.05, 3), coord, st.floats(0.05, 3), st.floats(0.3, 3), st.floats(-2, 2))
def test_parabola_automorphisms_are_isometries(x1, h1, x2, h2, s, t):
    P = Paraboloid(2)
    p, q = np.array([x1, x1 * x1 + h1]), np.array([x2, x2 * x2 + h2])
    G = _parabola_automorphism(s, t)
    gp, gq = ((G @ np.append(v, 1.0))[:2] for v in (p, q))
    assert chord_distance(P, gp, gq) == pytest.approx(chord_distance(P, p, q), rel=1e-7, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-0.95, 0.95), min_size=6, max_size=6))
def test_ball_metric_properties(c):
    D = Ball(2)
    pts = [np.array(c[i : i + 2]) for i in (0, 2, 4)]
    if any(np.linalg.norm(p) >= 0.97 for p in pts):
        return
    x, y, z = pts
    dxy = chord_distance(D, x, y)
    assert dxy >= 0
    assert dxy == pytest.approx(chord_distance(D, y, x), abs=1e-12)
    assert chord_distance(D, x, z) <= dxy + chord_distance(D, y, z) + 1e-9
