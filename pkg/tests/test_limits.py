import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpg import catalog
from cpg.domains import Ball, DomainError
from cpg.limits import (
    Chart,
    affine_kernel_check,
    analyze_limit,
    domain_sequence_limit,
    hausdorff,
    raster,
)
from cpg.suites import limit_examples


def _translation(v):
    M = np.eye(len(v) + 1)
    M[:-1, -1] = v
    return M


def _run(label, **kw):
    name, seq = limit_examples()[label]
    return analyze_limit(catalog.get(name).domain, seq, probes=200, **kw)


def test_parabola_contraction():
    rep = _run("parabola-contraction")
    assert rep.converged and rep.singular and rep.consistent
    assert rep.K.dim == 1 and rep.K.at_infinity()
    assert rep.R.dim == 0 and rep.R.contains(np.array([0.0, 0.0, 1.0]))
    assert rep.R_face is not None and rep.R_face.dim == 0 and np.allclose(rep.R_face.point, [0, 0])
    assert all(t.face_matches_R for t in rep.orbit_trace)
    assert max(t.distances[-1] for t in rep.orbit_trace) < 1e-12
    assert rep.to_json()["rank"] == 1


def test_simplex_cone_split():
    rep = _run("simplex-cone-split")
    assert rep.converged and rep.singular and rep.consistent
    assert rep.K.dim == 2 and rep.R.dim == 0 and rep.R.at_infinity()
    assert rep.R.contains(np.array([1.0, 0.0, 0.0, 0.0]))
    assert not rep.K_meets_interior and not rep.R_meets_interior
    assert rep.K_verdict.supporting and rep.R_verdict.supporting


def test_identity_is_not_singular():
    rep = _run("identity")
    assert rep.converged and not rep.singular
    assert rep.K.is_empty() and rep.R.is_empty()
    assert all(d == 0 for t in rep.orbit_trace for d in t.distances)
    assert len(rep.to_json()["orbit_trace"]) == 10


def test_sequence_must_preserve_the_domain():
    with pytest.raises(DomainError, match="does not preserve"):
        analyze_limit(catalog.get("quadrant").domain, lambda k: _translation([-float(k), 0.0]), steps=10, probes=20)


def test_kernel_verdicts():
    # x -> x + (k, 0) converges only like 1/k, so the tail test cannot certify it at 60 steps
    assert affine_kernel_check(lambda k: _translation([float(k), 0.0])).verdict == "inconclusive"
    # the subsequence k = 2^j converges fast; its limit has R(f) at infinity
    assert affine_kernel_check(lambda k: _translation([2.0**k, 0.0])).verdict == "vacuous"
    assert affine_kernel_check(lambda k: np.diag([2.0**-k, 2.0**-k, 1.0])).verdict == "holds"
    assert affine_kernel_check(lambda k: np.eye(3)).verdict == "vacuous"
    with pytest.raises(DomainError, match="not affine"):
        affine_kernel_check(lambda k: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4), st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_affine_limits_never_violate(lin, shift):
    A = np.array([[lin[0], lin[1]], [lin[2], lin[3]]])
    if abs(np.linalg.det(A)) < 1e-3:
        return
    G = np.eye(3)
    G[:2, :2] = A
    G[:2, 2] = shift
    powers = [np.eye(3)]
    for _ in range(40):
        P = powers[-1] @ G
        powers.append(P / np.max(np.abs(P)))
    assert affine_kernel_check(powers[1:], steps=40).verdict != "violated"


def test_domain_limit_of_rotations_is_stationary():
    def rot(k):
        c, s = math.cos(0.3 * k), math.sin(0.3 * k)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    lim = domain_sequence_limit(Ball(2), rot, steps=6, chart=Chart.default(2))
    assert lim.converged and not lim.degenerate and lim.estimated_dim == 2
    assert all(h == 0.0 for h in lim.hausdorff_trace)


def test_squashed_disc_is_degenerate():
    lim = domain_sequence_limit(Ball(2), lambda k: np.diag([1.0, 2.0**-k, 1.0]), steps=40)
    assert lim.converged and lim.degenerate and lim.estimated_dim == 1
    assert lim.to_json()["chart"]["resolution"] == 512


def test_osculating_zoom_of_the_disc_converges_to_the_ball():
    s = 2**-0.5
    P = np.array([[1.0, 0.0, 0.0], [0.0, -s, s], [0.0, s, s]])

    def g(k):
        lam = 1.0 / (k + 1)
        A = np.array([[1 / lam, 0.0, 0.0], [0.0, 1 / lam**2, 1 / lam**2], [0.0, 0.0, 1.0]])
        return P @ A

    # A blows the disc up at its boundary point (0, -1) towards the osculating parabola,
    # which P sends back onto the disc
    chart = Chart.default(2)
    lim = domain_sequence_limit(Ball(2), g, steps=60, chart=chart)
    assert lim.converged and not lim.degenerate
    ball = raster(Ball(2), chart)
    assert hausdorff(lim.limit_domain_estimate, ball, chart.spacing) <= float(np.linalg.norm(chart.spacing))


def test_hausdorff_properties():
    chart = Chart((-1.0, -1.0), (1.0, 1.0), 64)
    A = raster(Ball(2), chart)
    half = A.copy()
    half[:32] = False
    assert hausdorff(A, A, chart.spacing) == 0.0
    assert hausdorff(A, half, chart.spacing) == hausdorff(half, A, chart.spacing) > 0
    with pytest.raises(DomainError, match="empty"):
        hausdorff(A, np.zeros_like(A), chart.spacing)


def test_chart_validation():
    with pytest.raises(DomainError):
        domain_sequence_limit(catalog.get("paraboloid4").domain, lambda k: np.eye(5), steps=2)
    with pytest.raises(DomainError):
        raster(catalog.get("parabola").domain, Chart.default(2))
