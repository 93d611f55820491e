"""Seeded property suites, one per acceptance criterion, shared by the CLI and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from cpg import catalog
from cpg.asymptotic import (
    check_asymptotic_cone,
    extreme_decomposition,
    flow,
    foliation_chart,
    verify_foliation,
)
from cpg.classification import (
    PARABOLOID_FAMILY,
    RESIDUAL,
    Label,
    classify,
    invariant_profile,
    random_rational_affine,
    verify_witness,
)
from cpg.domains import AffineImage, Ball, ConvexDomain, DomainError, ProjectiveImage
from cpg.geometry import classify_convexity, is_conic_face, osculating_ellipsoid_test
from cpg.hilbert import chord_distance
from cpg.limits import affine_kernel_check, analyze_limit


@dataclass
class SuiteResult:
    name: str
    criterion: int
    passed: bool
    seed: int
    summary: str
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.criterion:2d} [{self.name}]: {'PASS' if self.passed else 'FAIL'} - {self.summary} (seed {self.seed})"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "criterion": self.criterion,
            "passed": self.passed,
            "seed": self.seed,
            "summary": self.summary,
            "details": self.details,
        }


def _domains(names, only: str | None) -> dict[str, ConvexDomain]:
    if only is not None:
        return {only: catalog.get(only).domain}
    return {nm: catalog.get(nm).domain for nm in names}


def _pairs(D: ConvexDomain, rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    X = D.sample_interior(rng, 2 * count)
    return X[:count], X[count:]


# ---------------------------------------------------------------------------
# 1-3: the Hilbert metric


def hilbert_closed_form(seed: int = 0, samples: int = 20, only: str | None = None) -> SuiteResult:
    """d(0, x) = log((1 + x)/(1 - x)) on the interval and on diameters of the disc."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-0.99, 0.99, samples)
    worst = 0.0
    cases = [(Ball(1), lambda x: np.array([x]))]
    u = rng.standard_normal(2)
    u /= np.linalg.norm(u)
    cases.append((Ball(2), lambda x: x * u))
    for D, embed in cases:
        for x in xs:
            exact = math.log((1 + abs(x)) / (1 - abs(x)))
            got = chord_distance(D, np.zeros(D.n), embed(x))
            worst = max(worst, abs(got - exact) / exact if exact else abs(got))
    ok = worst <= 1e-9
    return SuiteResult("hilbert-closed-form", 1, ok, seed, f"max relative error {worst:.2e} over {2 * samples} points", {"max_rel_error": worst})


def metric_axioms(seed: int = 0, samples: int = 1000, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for name, D in _domains(["ball2", "parabola", "quadrant", "paraboloid3"], only).items():
        X = D.sample_interior(rng, 3 * samples).reshape(samples, 3, D.n)
        asym, slack = 0.0, math.inf
        for x, y, z in X:
            dxy, dyx = chord_distance(D, x, y), chord_distance(D, y, x)
            dyz, dxz = chord_distance(D, y, z), chord_distance(D, x, z)
            asym = max(asym, abs(dxy - dyx))
            slack = min(slack, dxy + dyz - dxz)
        good = asym <= 1e-12 and slack >= -1e-9
        ok &= good
        details[name] = {"max_asymmetry": asym, "min_triangle_slack": slack, "passed": good}
    return SuiteResult("metric-axioms", 2, ok, seed, f"{samples} triples per domain on {len(details)} domains", details)


def _random_projective(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        A = rng.standard_normal((n, n))
        if np.linalg.cond(A) <= 10:
            break
    T = np.eye(n + 1)
    T[:n, :n] = A
    T[:n, n] = rng.uniform(-1, 1, n)
    T[n, :n] = rng.uniform(-0.5, 0.5, n) / math.sqrt(n)  # keeps the image of the ball in the chart
    return T


def projective_invariance(seed: int = 0, samples: int = 100, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    name, B = next(iter(_domains(["ball2"], only).items()))
    worst = 0.0
    for _ in range(10):
        T = _random_projective(rng, B.n)
        image = ProjectiveImage(T, B)
        P, Q = _pairs(B, rng, samples)
        for p, q in zip(P, Q):
            tp, tq = image.push(p), image.push(q)
            worst = max(worst, abs(chord_distance(image, tp, tq) - chord_distance(B, p, q)))
    ok = worst <= 1e-8
    return SuiteResult("projective-invariance", 3, ok, seed, f"max error {worst:.2e} over 10 maps x {samples} pairs on {name}", {"max_error": worst})


# ---------------------------------------------------------------------------
# 4-7: asymptotic cones, foliation, flow, strict convexity


def asymptotic_cone_suite(seed: int = 0, samples: int = 200, only: str | None = None) -> SuiteResult:
    details = {}
    for name, D in _domains(catalog.names(), only).items():
        details[name] = check_asymptotic_cone(D, samples, samples, seed).to_json()
    failed = sorted(k for k, v in details.items() if not v["passed"])
    ok = not failed
    summary = f"{len(details)} domains, {samples} inside and outside directions each"
    return SuiteResult("asymptotic-cone", 4, ok, seed, summary + (f"; failed: {', '.join(failed)}" if failed else ""), details)


def foliation_suite(seed: int = 0, samples: int = 1000, only: str | None = None) -> SuiteResult:
    details = {}
    ok = True
    targets = _domains(["parabola-x-rplus", "quadrant-x-r", "paraboloid3"], only)
    for name, D in targets.items():
        rep = verify_foliation(foliation_chart(D), samples, seed)
        good = rep.passed and rep.max_violation <= 1e-8
        ok &= good
        details[name] = rep.to_json()
    if only is None:
        rep = verify_foliation(foliation_chart(catalog.get("hyperbola").domain), samples, seed)
        flagged = rep.flagged is not None and not rep.passed
        ok &= flagged
        details["hyperbola"] = rep.to_json()
    return SuiteResult("foliation", 5, ok, seed, f"{samples} samples on {', '.join(details)}", details)


def extreme_decomposition_suite(seed: int = 0, samples: int = 100, only: str | None = None) -> SuiteResult:
    details = {}
    for name, D in _domains(["parabola", "parabola-x-rplus", "paraboloid3", "simplex-cone3"], only).items():
        details[name] = extreme_decomposition(D, samples, seed).to_json()
        details[name].pop("S_sample")
    failed = sorted(k for k, v in details.items() if not v["verdict"])
    ok = not failed
    return SuiteResult("extreme-decomposition", 0, ok, seed, f"{samples} samples on {len(details)} domains", details)


FLOW_TIMES = (0.1, 1.0, 10.0)


def flow_contraction(seed: int = 0, samples: int = 1000, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for name, D in _domains(["parabola", "paraboloid3"], only).items():
        chart = foliation_chart(D)
        X, Y = _pairs(D, rng, samples)
        excess, semigroup = -math.inf, 0.0
        for x, y in zip(X, Y):
            d0 = chord_distance(D, x, y)
            for t in FLOW_TIMES:
                excess = max(excess, chord_distance(D, flow(chart, x, t), flow(chart, y, t)) - d0)
            s, t = rng.uniform(0, 5, 2)
            a, b = flow(chart, flow(chart, x, t), s), flow(chart, x, s + t)
            semigroup = max(semigroup, float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b))))
        good = excess <= 1e-9 and semigroup <= 1e-9
        ok &= good
        details[name] = {"max_distance_increase": excess, "max_semigroup_error": semigroup, "passed": good}
    return SuiteResult("flow-contraction", 6, ok, seed, f"{samples} pairs, t in {list(FLOW_TIMES)}", details)


def strict_convexity(seed: int = 0, samples: int = 0, only: str | None = None) -> SuiteResult:
    """Strictly convex exactly when dim AC = 1, on quasi-homogeneous entries.

    Properly convex entries use the domain itself. Entries with a lineality
    space R^k are tested on their properly convex factor (the quotient by
    the lineality), which is where both sides of the equivalence live; R^n
    has an empty factor and is skipped.
    """
    names = [nm for nm in catalog.names() if catalog.get(nm).quasi_homogeneous]
    details = {}
    ok = True
    for name, D in _domains(names, only).items():
        prof = invariant_profile(D)
        conv = classify_convexity(D)
        family = catalog.get(name).expected_class in PARABOLOID_FAMILY
        if prof.proper_factor_dim == 0:
            details[name] = {"skipped": "no properly convex factor"}
            continue
        strict = conv.strictly_convex if conv.properly_convex else prof.strictly_convex
        good = strict == (prof.ac_dim == 1)
        if family:
            good &= strict and prof.ac_dim == 1
        ok &= good
        details[name] = {
            "properly_convex": conv.properly_convex,
            "strictly_convex": strict,
            "lineality": prof.k,
            "ac_dim": prof.ac_dim,
            "passed": good,
        }
    return SuiteResult("strict-convexity", 7, ok, seed, f"{len(details)} quasi-homogeneous entries", details)


# ---------------------------------------------------------------------------
# 8: classification


def classification_suite(seed: int = 0, samples: int = 50, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    names = [nm for nm in catalog.names() if 2 <= catalog.get(nm).domain.n <= 4]
    details = {}
    ok = True
    for name, D in _domains(names, only).items():
        expected = catalog.get(name).expected_class
        wrong, witness_fail = 0, 0
        for i in range(samples):
            L, a = random_rational_affine(rng, D.n)
            C = AffineImage(L, a, D)
            res = classify(C)
            if res.label != expected:
                wrong += 1
                continue
            if expected in RESIDUAL or expected == Label.NOT_CLASSIFIED:
                continue
            if res.witness is None or not verify_witness(C, res, 1000, seed + i).passed:
                witness_fail += 1
        good = wrong == 0 and witness_fail == 0
        ok &= good
        details[name] = {"expected": expected.value, "misclassified": wrong, "witness_failures": witness_fail, "passed": good}
    return SuiteResult("classification", 8, ok, seed, f"{samples} conjugates for each of {len(details)} entries", details)


# ---------------------------------------------------------------------------
# 9: conic faces


def conic_faces(seed: int = 0, samples: int = 20, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    checks = []

    def record(what, D, b, expect):
        F = D.face_of(b)
        v = is_conic_face(D, F)
        checks.append({"case": what, "point": np.asarray(b, dtype=float).tolist(), "face_dim": F.dim,
                       "conic": v.conic, "expected": expect, "chain_length": len(v.chain)})
        return v.conic == expect and (not expect or len(v.chain) == D.n - F.dim)

    ok = True
    # every face of a simplex is conic; the vertices need a chain of length n
    for name in ("simplex-cone3", "quadrant", "tetrahedron"):
        D = catalog.get(name).domain
        P = D.as_hpoly()
        for vx in P.vertices():
            ok &= record(f"{name} vertex", D, np.array(vx, dtype=float), True)
        for b in D.sample_boundary(rng, samples):
            ok &= record(f"{name} boundary face", D, b, True)
    # {y > x^2, z > 0}: the half-line {(0, 0, z) : z > 0} is a face that is not conic
    D = catalog.get("parabola-x-rplus").domain
    for z in rng.uniform(0.1, 10.0, samples):
        ok &= record("parabola-x-rplus z-axis face", D, np.array([0.0, 0.0, z]), False)
    # the facet {z = 0} is conic
    ok &= record("parabola-x-rplus bottom facet", D, np.array([0.0, 1.0, 0.0]), True)
    P = catalog.get("parabola").domain
    for x in rng.uniform(-3, 3, samples):
        ok &= record("parabola point face", P, np.array([x, x * x]), False)
    return SuiteResult("conic-faces", 9, ok, seed, f"{len(checks)} face verdicts", {"checks": checks})


# ---------------------------------------------------------------------------
# 10: limits of automorphisms


def _diag(values):
    return np.diag(np.append(np.asarray(values, dtype=float), 1.0))


def limit_examples() -> dict[str, tuple[str, Callable]]:
    """The three reference sequences: a parabolic contraction, a simplex-cone split, the identity."""
    return {
        "parabola-contraction": ("parabola", lambda k: _diag([2.0**-k, 4.0**-k])),
        "simplex-cone-split": ("simplex-cone3", lambda k: _diag([math.exp(k), 1.0, math.exp(-k)])),
        "identity": ("parabola", lambda k: np.eye(3)),
    }


def limits_suite(seed: int = 0, samples: int = 1000, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for label, (name, seq) in limit_examples().items():
        rep = analyze_limit(catalog.get(name).domain, seq, probes=samples, seed=seed)
        good = rep.converged and rep.consistent
        if label == "identity":
            good &= not rep.singular and rep.K.dim < 0 and rep.R.dim < 0
        else:
            good &= rep.singular
        ok &= good
        details[label] = {"converged": rep.converged, "singular": rep.singular, "consistent": rep.consistent, "passed": good}
    checked = 0
    for name in ("simplex-cone3", "parabola"):
        D = catalog.get(name).domain
        for i in range(20):
            # exponents on a quarter grid so every sequence converges in a known number of steps
            if name == "simplex-cone3":
                a = np.append(rng.integers(-4, 5, 3) / 4, 0.0)
            else:
                c = rng.choice([-4, -3, -2, -1, 1, 2, 3, 4]) / 4
                a = np.array([c, 2 * c, 0.0])
            rep = analyze_limit(D, _diagonal_powers(a), steps=_steps_for(a), probes=samples, seed=seed + i)
            tested = rep.converged and rep.singular
            checked += tested
            if not rep.converged or (tested and not rep.consistent):
                ok = False
                details[f"{name}#{i}"] = {"exponents": a.tolist(), "converged": rep.converged, "consistent": rep.consistent}
    details["diagonal_limits_checked"] = checked
    kernel = {}
    for lam in (0.5, 0.9):
        steps = max(60, math.ceil(math.log(1e-13) / math.log(lam)))  # until lam^k is below the tolerance
        for shift in ((0.0, 0.0), (1.0, -2.0)):
            seq = lambda k, lam=lam, c=shift: _contraction(lam**k, c)
            kernel[f"lambda={lam},center={list(shift)}"] = affine_kernel_check(seq, steps).verdict
    ok &= all(v == "holds" for v in kernel.values())
    details["kernel_verdicts"] = kernel
    return SuiteResult("limits", 10, ok, seed, f"3 examples, 40 diagonal sequences ({checked} singular limits), {len(kernel)} contractions", details)


def _diagonal_powers(a: np.ndarray) -> Callable:
    """k -> diag(e^{k a}) scaled by e^{-k max a}, the same projective map without overflow."""
    return lambda k: np.diag(np.exp(k * (a - a.max())))


def _steps_for(a: np.ndarray) -> int:
    gaps = a.max() - a
    gaps = gaps[gaps > 0]
    return max(60, math.ceil(32 / gaps.min())) if gaps.size else 60


def _contraction(r: float, c) -> np.ndarray:
    """x -> c + r (x - c): converges to the constant map at c."""
    c = np.asarray(c, dtype=float)
    M = np.eye(c.size + 1)
    M[:-1, :-1] *= r
    M[:-1, -1] = (1 - r) * c
    return M


# ---------------------------------------------------------------------------
# 11-12: osculating ellipsoids and bounded faces


def osculating(seed: int = 0, samples: int = 10, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    checks = []
    ok = True
    for name in ("ball2", "paraboloid3"):
        D = catalog.get(name).domain
        for b in D.sample_boundary(rng, samples):
            r = osculating_ellipsoid_test(D, b)
            good = r.osculating and r.disagreement <= 1e-4
            ok &= good
            checks.append({"domain": name, "point": b.tolist(), "osculating": r.osculating, "disagreement": r.disagreement})
    vertices = []
    for name in ("square", "tetrahedron", "simplex-cone3", "quadrant"):
        D = catalog.get(name).domain
        vertices += [(name, D, np.array(v, dtype=float)) for v in D.as_hpoly().vertices()]
    for name, D, v in vertices[:10]:
        r = osculating_ellipsoid_test(D, v)
        ok &= not r.osculating
        checks.append({"domain": name, "point": v.tolist(), "osculating": r.osculating, "reason": r.reason})
    return SuiteResult("osculating", 11, ok, seed, f"{2 * samples} smooth points, {min(10, len(vertices))} vertices", {"checks": checks})


def bounded_faces(seed: int = 0, samples: int = 500, only: str | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    names = [nm for nm in catalog.names() if catalog.get(nm).quasi_homogeneous]
    details = {}
    ok = True
    for name, D in _domains(names, only).items():
        try:
            B = D.sample_boundary(rng, samples)
        except DomainError:
            details[name] = {"boundary_points": 0, "positive_faces": 0, "bounded_positive_faces": 0}
            continue
        positive = bad = 0
        for b in B:
            F = D.face_of(b)
            if F.dim > 0:
                positive += 1
                bad += bool(F.bounded)
        ok &= bad == 0
        details[name] = {"boundary_points": int(B.shape[0]), "positive_faces": positive, "bounded_positive_faces": bad}
    return SuiteResult("bounded-faces", 12, ok, seed, f"{samples} boundary samples on {len(details)} entries", details)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "hilbert-closed-form": hilbert_closed_form,
    "metric-axioms": metric_axioms,
    "projective-invariance": projective_invariance,
    "asymptotic-cone": asymptotic_cone_suite,
    "foliation": foliation_suite,
    "flow-contraction": flow_contraction,
    "strict-convexity": strict_convexity,
    "classification": classification_suite,
    "conic-faces": conic_faces,
    "limits": limits_suite,
    "osculating": osculating,
    "bounded-faces": bounded_faces,
    "extreme-decomposition": extreme_decomposition_suite,
}

DEFAULT_SAMPLES = {
    "hilbert-closed-form": 20,
    "metric-axioms": 1000,
    "projective-invariance": 100,
    "asymptotic-cone": 200,
    "foliation": 1000,
    "flow-contraction": 1000,
    "strict-convexity": 0,
    "classification": 50,
    "conic-faces": 20,
    "limits": 1000,
    "osculating": 10,
    "bounded-faces": 500,
    "extreme-decomposition": 100,
}


def run_suite(name: str, seed: int = 0, samples: int | None = None, only: str | None = None) -> SuiteResult:
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; known suites: {', '.join(SUITES)}")
    n = DEFAULT_SAMPLES[name] if samples is None else samples
    return SUITES[name](seed=seed, samples=n, only=only)
