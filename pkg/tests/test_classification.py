import dataclasses
from fractions import Fraction as F

import numpy as np
import pytest

from cpg import catalog
from cpg.classification import (
    RESIDUAL,
    AffineMap,
    Label,
    canonical_domain,
    classify,
    invariant_profile,
    random_rational_affine,
    verify_witness,
)
from cpg.domains import AffineImage, HPoly, Paraboloid, Product, halfspace


@pytest.mark.parametrize("name", catalog.names())
def test_catalog_labels(name):
    e = catalog.get(name)
    res = classify(e.domain)
    assert res.label == e.expected_class
    if res.label in RESIDUAL or res.label == Label.NOT_CLASSIFIED:
        assert res.witness is None
    else:
        assert verify_witness(e.domain, res, 300).passed


@pytest.mark.parametrize(
    "D, reason",
    [
        (catalog.get("square").domain, "bounded"),
        (HPoly(((0, 1), (0, -1)), (1, 0)), "parallel hyperplanes"),
        (HPoly(((0, -1), (-1, 0), (-1, -1)), (0, 0, -1)), "bounded face"),
        (catalog.get("interval").domain, "dimension 1"),
        (catalog.get("hyperbola").domain, None),
    ],
)
def test_not_classified(D, reason):
    res = classify(D)
    assert res.label == Label.NOT_CLASSIFIED
    if reason:
        assert reason in res.reason


def test_profiles():
    p = invariant_profile(catalog.get("parabola-x-rplus-x-r").domain)
    assert (p.n, p.k, p.ac_dim, p.is_cone, p.properly_convex, p.polyhedral) == (4, 1, 2, False, False, False)
    p = invariant_profile(catalog.get("simplex-cone4").domain)
    assert (p.k, p.ac_dim, p.is_cone, p.polyhedral) == (0, 4, True, True)


def test_conjugates_round_trip():
    rng = np.random.default_rng(11)
    for name in ["parabola", "quadrant-x-r", "paraboloid3", "parabola-x-rplus", "elliptic-cone3", "half-space4"]:
        D = catalog.get(name).domain
        for i in range(4):
            L, a = random_rational_affine(rng, D.n)
            C = AffineImage(L, a, D)
            res = classify(C)
            assert res.label == catalog.get(name).expected_class
            if res.witness is not None:
                assert verify_witness(C, res, 400, seed=i).passed


def test_witness_maps_onto_canonical_form():
    L = ((F(1), F(2)), (F(0), F(3)))
    D = AffineImage(L, (F(1), F(-1)), Paraboloid(2))
    res = classify(D)
    assert res.label == Label.PARABOLA and not res.witness.exact  # quadric witnesses are numeric
    target = canonical_domain(Label.PARABOLA)
    rng = np.random.default_rng(0)
    X = D.sample_interior(rng, 50)
    assert np.all(target.contains_many(res.witness.apply_many(X)) == 0)
    Y = target.sample_boundary(rng, 20)
    g = D.values(res.witness.inverse().apply_many(Y))
    assert np.max(np.abs(g)) < 1e-9


def test_tampered_witness_is_rejected():
    D = catalog.get("quadrant").domain
    res = classify(D)
    shifted = dataclasses.replace(res.witness, translation=(F(1), F(0)))
    bad = dataclasses.replace(res, witness=shifted)
    rep = verify_witness(D, bad, 400)
    assert rep.exact and not rep.passed and rep.disagreements > 0
    D2 = Product((halfspace(1), Paraboloid(2)))
    res2 = classify(D2)
    warped = AffineMap.from_rows(2 * res2.witness.matrix(), res2.witness.offset())
    assert not verify_witness(D2, dataclasses.replace(res2, witness=warped), 400).passed


def test_affine_map_json_and_inverse():
    W = AffineMap.from_rows([[F(1, 2), 0], [0, 2]], [F(1), F(-3, 4)])
    assert W.to_json() == {"linear": [[[1, 2], 0], [0, 2]], "translation": [1, [-3, 4]], "exact": True}
    x = [F(2), F(5)]
    assert list(W.inverse()(W(x))) == x
    Wf = AffineMap.from_rows([[0.5, 0.1], [0.0, 2.0]], [0.3, 0.0])
    assert not Wf.exact and np.allclose(Wf.inverse()(Wf([1.0, 2.0])), [1.0, 2.0])


def test_random_rational_affine_bounds():
    rng = np.random.default_rng(4)
    for n in (2, 3, 4):
        L, a = random_rational_affine(rng, n, 1e3)
        M = np.array([[float(v) for v in r] for r in L])
        assert np.linalg.cond(M) <= 1e3 and len(a) == n
        assert all(isinstance(v, F) for r in L for v in r)
