"""Asymptotic cones, the foliation by cone cosets, its base map and flow.

For a quasi-homogeneous properly convex domain every section
Omega_x = Omega ∩ (x + span AC) is a translate s(x) + AC of the asymptotic
cone. `base_point` computes s(x) by a strategy chosen per representation
and refuses inputs where the section is visibly not a cone translate.
When the domain has a lineality space V the sections are only defined up
to V, and s(x) is the apex whose V-component equals that of x.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from cpg import cones, exact, polyhedral
from cpg.domains import (
    INF,
    AffineImage,
    ConvexDomain,
    DomainError,
    HPoly,
    Membership,
    Product,
    _rational,
)
from cpg.linalg import complement, orthonormal_basis
from cpg.projective import ProjectivePoint

T_CAP = 1e4
OUTSIDE_MARGIN = 1e-6


class FoliationError(DomainError):
    pass


def _strategy(D: ConvexDomain, top: bool = True) -> str:
    cone = D.asymptotic_cone()
    k = D.lineality().shape[0]
    ac = cone.span_basis().shape[0] - k
    if isinstance(D, HPoly):
        return "polyhedral-vertex"
    if isinstance(D, Product):
        subs = [_strategy(f, top=False) for f in D.factors]
        return "product" if "rejected" not in subs else "rejected"
    if isinstance(D, AffineImage):
        return "affine-image" if _strategy(D.base, top=False) != "rejected" else "rejected"
    if ac == 0:
        return "trivial" if not top else "rejected"
    if D.cone_apex() is not None:
        return "cone-apex"
    if ac == 1:
        return "ray-exit"
    return "rejected"


@dataclass(frozen=True)
class FoliationChart:
    domain: ConvexDomain
    cone: cones.Cone
    span_basis: np.ndarray
    lineality: np.ndarray
    apex_solver: str

    @property
    def ac_dim(self) -> int:
        return self.span_basis.shape[0]


def foliation_chart(D: ConvexDomain) -> FoliationChart:
    cone = D.asymptotic_cone()
    return FoliationChart(D, cone, cone.span_basis(), D.lineality(), _strategy(D))


def _poly_section_apex(D: HPoly, x) -> np.ndarray:
    W = _span_mod_lineality(D)
    d = len(W)
    if d == 0:
        return np.asarray(x)
    rx = _rational(x)
    if rx is not None:
        Wt = exact.transpose(W)
        AW = exact.matmul(D.rows(), Wt)
        rhs = [bi - exact.dot(r, rx) for r, bi in zip(D.A, D.b)]
        ys = polyhedral.vertices(AW, rhs, d)
        if len(ys) != 1:
            raise FoliationError(f"foliation hypothesis violated: section has {len(ys)} vertices")
        z = exact.matvec(Wt, list(ys[0]))
        return np.array([a + b for a, b in zip(rx, z)], dtype=object)
    return _float_section_apex(D, np.asarray(x, dtype=float), np.array(exact.as_float(W), dtype=float))


def _span_mod_lineality(D: HPoly) -> list[list[Fraction]]:
    """Exact basis of span AC ∩ (lineality)^⊥."""
    span = D.asymptotic_cone().span_basis_exact()
    L = D.lineality_exact()
    if not span or not L:
        return span
    # v = span^T a with L v = 0
    coeffs = exact.nullspace(exact.matmul(L, exact.transpose(span)), len(span))
    return [exact.matvec(exact.transpose(span), a) for a in coeffs]


def _float_section_apex(D: HPoly, x: np.ndarray, W: np.ndarray) -> np.ndarray:
    A, b = D._Af, D._bf
    AW = A @ W.T
    rhs = b - A @ x
    d = W.shape[0]
    scale = 1.0 + float(np.linalg.norm(x))
    found: list[np.ndarray] = []
    for rows in itertools.combinations(range(A.shape[0]), d):
        M = AW[list(rows)]
        if abs(np.linalg.det(M)) <= 1e-12 * max(1.0, np.linalg.norm(M)) ** d:
            continue
        y = np.linalg.solve(M, rhs[list(rows)])
        if np.all(AW @ y - rhs <= 1e-9 * scale * (1 + np.linalg.norm(y))):
            if not any(np.linalg.norm(y - f) <= 1e-9 * scale * (1 + np.linalg.norm(y)) for f in found):
                found.append(y)
    if len(found) != 1:
        raise FoliationError(f"foliation hypothesis violated: section has {len(found)} vertices")
    return x + W.T @ found[0]


def _ray_direction(D: ConvexDomain) -> np.ndarray:
    cone = D.asymptotic_cone()
    L = D.lineality()
    rays, _ = cone.extreme_rays()
    C = complement(L, D.n)
    rays = [C.T @ (C @ r) for r in rays]
    rays = [r for r in rays if np.linalg.norm(r) > 1e-12]
    if len(rays) != 1:
        raise FoliationError("foliation hypothesis violated: expected a single asymptotic ray")
    return rays[0] / np.linalg.norm(rays[0])


def section_apex(D: ConvexDomain, x) -> np.ndarray:
    """s(x) for the representations that support it; raises FoliationError otherwise."""
    strategy = _strategy(D, top=False)
    if strategy == "polyhedral-vertex":
        return _poly_section_apex(D, x)
    if strategy == "product":
        parts = [section_apex(f, p) for f, p in zip(D.factors, D.split(x))]
        if all(p.dtype == object for p in parts):
            return np.concatenate(parts)
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])
    if strategy == "affine-image":
        return np.asarray(D.push(section_apex(D.base, D.pull(x))))
    if strategy == "trivial":
        return np.asarray(x)
    if strategy == "cone-apex":
        p = np.asarray(D.cone_apex(), dtype=float)
        L = D.lineality()
        d = np.asarray(x, dtype=float) - p
        if L.shape[0]:
            Q = orthonormal_basis(L, D.n)
            return p + Q.T @ (Q @ d)
        return p
    if strategy == "ray-exit":
        v = _ray_direction(D)
        x = np.asarray(x, dtype=float)
        t = D._exit(x, -v)
        if t == INF:
            raise FoliationError("foliation hypothesis violated: section has no boundary along the ray")
        return x - float(t) * v
    raise FoliationError(
        "foliation hypothesis violated: no apex strategy for this representation "
        "(sections are not known to be cone translates)"
    )


def base_point(chart: FoliationChart, x) -> np.ndarray:
    D = chart.domain
    D._check_dim(x)
    if D.contains(x) != Membership.INTERIOR:
        raise DomainError("x is not an interior point")
    if chart.ac_dim - chart.lineality.shape[0] == 0:
        raise FoliationError("foliation hypothesis violated: asymptotic cone is trivial")
    return section_apex(D, x)


def flow(chart: FoliationChart, x, t: float) -> np.ndarray:
    """c_t(x) = s(x) + e^t (x - s(x))."""
    s = np.asarray(base_point(chart, x), dtype=float)
    x = np.asarray(x, dtype=float)
    return s + np.exp(t) * (x - s)


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class FoliationReport:
    samples: int
    max_violation: float
    passed: bool
    strategy: str
    exact: bool
    t_cap: float = T_CAP
    tolerance: float = 1e-8
    flagged: str | None = None
    worst_point: list | None = None

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "max_violation": self.max_violation,
            "passed": self.passed,
            "strategy": self.strategy,
            "exact": self.exact,
            "t_cap": self.t_cap,
            "tolerance": self.tolerance,
            "flagged": self.flagged,
            "worst_point": self.worst_point,
        }


def _rational_interior(D: HPoly, x: np.ndarray) -> list[Fraction]:
    for den in (64, 1024, 2**20):
        r = [Fraction(round(v * den), den) for v in x]
        if D.contains(r) == Membership.INTERIOR:
            return r
    return list(D.witness_exact)


def _exact_cone_sample(cone: cones.PolyCone, rng: np.random.Generator, cap: float) -> list[Fraction]:
    n = cone.n
    c = [Fraction(0)] * n
    for r in cone.rays_exact():
        w = Fraction(int(rng.integers(0, int(cap) + 1)), int(rng.integers(1, 8)))
        c = [a + w * b for a, b in zip(c, r)]
    for v in cone.lineality_basis_exact():
        w = Fraction(int(rng.integers(-int(cap), int(cap) + 1)), int(rng.integers(1, 8)))
        c = [a + w * b for a, b in zip(c, v)]
    return c


def _segment_violation(D: ConvexDomain, x: np.ndarray, y: np.ndarray) -> float:
    """Relative length of the part of [x, y] outside the closure."""
    d = y - x
    nd = float(np.linalg.norm(d))
    if nd == 0:
        return 0.0
    t = float(D._exit(x, d))
    return 0.0 if t >= 1 else (1 - t) * nd / (1 + float(np.linalg.norm(y)))


def _fallback_apex(D: ConvexDomain, x: np.ndarray) -> np.ndarray:
    rays, _ = D.asymptotic_cone().extreme_rays()
    v = np.sum(rays, axis=0) if len(rays) else np.zeros(D.n)
    if np.linalg.norm(v) == 0:
        return x
    t = D._exit(x, -v)
    return x if t == INF else x - float(t) * v


def verify_foliation(
    chart: FoliationChart, samples: int = 1000, seed: int = 0, t_cap: float = T_CAP, tol: float = 1e-8
) -> FoliationReport:
    """Check that sections are translates s(x) + AC on random samples.

    Per sample x: s(x) must lie on the boundary, s(x) + c must stay in the
    closure for random cone elements c with |c| up to `t_cap`, and random
    points y of the section must satisfy y - s(x) in AC. Violations are
    relative distances. Polyhedral domains run in exact arithmetic.
    """
    rng = np.random.default_rng(seed)
    D, cone = chart.domain, chart.cone
    exact_mode = isinstance(D, HPoly)
    flagged = None
    if chart.apex_solver == "rejected":
        flagged = "no apex strategy: representation is not known to be foliated by cone translates"
    span = chart.span_basis
    worst, worst_pt = 0.0, None
    X = D.sample_interior(rng, samples)
    for x in X:
        if exact_mode:
            xr = _rational_interior(D, x)
            try:
                s = section_apex(D, xr)
            except FoliationError as err:
                flagged = flagged or str(err)
                s = np.array(_fallback_apex(D, np.asarray(x, dtype=float)))
                xr = None
            viol = _exact_checks(D, cone, xr, s, rng, t_cap) if xr is not None else _float_checks(D, cone, span, np.asarray(x, float), np.asarray(s, float), rng, t_cap)
        else:
            try:
                s = np.asarray(section_apex(D, x), dtype=float)
            except FoliationError as err:
                flagged = flagged or str(err)
                s = _fallback_apex(D, x)
            viol = _float_checks(D, cone, span, x, s, rng, t_cap)
        if viol > worst:
            worst, worst_pt = viol, [float(v) for v in x]
    passed = worst <= tol and flagged is None
    if worst > tol and flagged is None:
        flagged = "sections are not translates of the asymptotic cone"
    return FoliationReport(samples, worst, passed, chart.apex_solver, exact_mode, t_cap, tol, flagged, worst_pt)


def _exact_checks(D: HPoly, cone, x, s, rng, t_cap) -> float:
    s = [exact.to_fraction(v) for v in s]
    worst = 0.0
    if D.contains(s) != Membership.BOUNDARY:
        worst = max(worst, abs(D.value(np.array(s, dtype=float))) + 1e-300)
    c = _exact_cone_sample(cone, rng, t_cap)
    y = [a + b for a, b in zip(s, c)]
    if D.contains(y) == Membership.OUTSIDE:
        worst = max(worst, _segment_violation(D, np.array(x, dtype=float), np.array(y, dtype=float)) or 1e-300)
    # a random point of the section through x
    span = cone.span_basis_exact()
    if span:
        w = [Fraction(int(rng.integers(-5, 6))) for _ in span]
        d = [sum((wi * row[j] for wi, row in zip(w, span)), Fraction(0)) for j in range(D.n)]
        if any(v != 0 for v in d):
            hi = D._exit(x, d)
            lo = D._exit(x, [-v for v in d])
            hi = Fraction(int(t_cap)) if hi == INF else hi
            lo = Fraction(int(t_cap)) if lo == INF else lo
            r = -lo + (hi + lo) * Fraction(int(rng.integers(1, 100)), 100)
            yy = [a + r * b for a, b in zip(x, d)]
            diff = [a - b for a, b in zip(yy, s)]
            if not cone.contains(diff):
                worst = max(worst, cone.violation(np.array(diff, dtype=float)) / (1 + float(np.linalg.norm(np.array(yy, dtype=float)))))
    return worst


def _float_checks(D, cone, span, x, s, rng, t_cap) -> float:
    worst = 0.0
    g = D.value(s)
    worst = max(worst, abs(g))
    c = cone.sample(rng)
    nc = float(np.linalg.norm(c))
    if nc > 0:
        c = c / nc * rng.uniform(0, t_cap)
        worst = max(worst, _segment_violation(D, x, s + c))
    if span.shape[0]:
        d = span.T @ rng.standard_normal(span.shape[0])
        if np.linalg.norm(d) > 0:
            hi = min(float(D._exit(x, d)), t_cap)
            lo = min(float(D._exit(x, -d)), t_cap)
            y = x + rng.uniform(-lo, hi) * d
            worst = max(worst, cone.violation(y - s) / (1 + float(np.linalg.norm(y))))
    return worst


@dataclass
class ExtremeReport:
    S_sample: np.ndarray
    E_inf: list
    continuous: bool
    verdict: bool
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "S_sample": np.asarray(self.S_sample, dtype=float).tolist(),
            "E_inf": [[float(v) for v in p.coords] for p in self.E_inf],
            "continuous": self.continuous,
            "verdict": self.verdict,
            "failures": self.failures,
        }


def extreme_decomposition(D: ConvexDomain, samples: int = 100, seed: int = 0) -> ExtremeReport:
    """Sample S = s(interior) and the extreme rays of AC, then test E = S ∪ E_inf.

    (a) every sampled point of S is a 0-dimensional face; (b) sampled
    finite extreme boundary points are fixed by s after a small push into the
    domain along the cone.
    """
    rng = np.random.default_rng(seed)
    chart = foliation_chart(D)
    failures: list[str] = []
    S = []
    for x in D.sample_interior(rng, samples):
        s = np.asarray(base_point(chart, x), dtype=float)
        S.append(s)
        if D.face_of(s).dim != 0:
            failures.append(f"s(x) = {s.tolist()} is not an extreme point")
    c0 = chart.cone.relint_element()
    c0 = c0 / np.linalg.norm(c0)
    try:
        B = D.sample_boundary(rng, samples)
    except DomainError:
        B = np.zeros((0, D.n))
    for e in B:
        if D.face_of(e).dim != 0:
            continue
        scale = 1 + float(np.linalg.norm(e))
        y = e + 1e-6 * scale * c0
        if D.contains(y) != Membership.INTERIOR:
            continue
        s = np.asarray(base_point(chart, y), dtype=float)
        if np.linalg.norm(s - e) > 1e-6 * scale:
            failures.append(f"extreme point {e.tolist()} is not in S")
    rays, continuous = chart.cone.extreme_rays(rng)
    E_inf = [ProjectivePoint.at_infinity(r) for r in rays]
    verdict = not failures and len(E_inf) > 0
    return ExtremeReport(np.array(S).reshape(-1, D.n), E_inf, continuous, verdict, failures)


@dataclass
class ConeCheckReport:
    inside_trials: int
    outside_trials: int
    inside_violations: int
    outside_violations: int
    exact_match: bool | None
    t_cap: float
    passed: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def check_asymptotic_cone(
    D: ConvexDomain, inside: int = 200, outside: int = 200, seed: int = 0, t_cap: float = T_CAP
) -> ConeCheckReport:
    """Definitional check of the computed cone.

    Directions in the cone must keep random interior points inside up to
    t = t_cap. Random unit directions whose distance to the cone exceeds
    OUTSIDE_MARGIN must leave the domain from the sampled point (the exit
    parameter is computed, not searched, so no cap is needed there).
    Polyhedral inputs also compare against {u : A u <= 0} exactly.
    """
    rng = np.random.default_rng(seed)
    cone = D.asymptotic_cone()
    X = D.sample_interior(rng, max(inside, outside))
    bad_in = 0
    for i in range(inside):
        u = cone.sample(rng)
        nu = float(np.linalg.norm(u))
        if nu == 0:
            continue
        u = u / nu
        x = X[i]
        for t in (rng.uniform(0, t_cap), t_cap):
            if not D.closure_contains(x + t * u):
                bad_in += 1
                break
    bad_out, tried, attempts = 0, 0, 0
    # when the cone is all of R^n no direction is outside and the loop ends empty
    while tried < outside and attempts < 50 * outside:
        attempts += 1
        u = rng.standard_normal(D.n)
        u /= np.linalg.norm(u)
        if cone.violation(u) <= OUTSIDE_MARGIN:
            continue
        x = X[tried % X.shape[0]]
        tried += 1
        if D._exit(x, u) == INF:
            bad_out += 1
    exact_match = None
    P = D.as_hpoly()
    if P is not None:
        exact_match = _exact_poly_cone_check(P, cone, rng)
    passed = bad_in == 0 and bad_out == 0 and exact_match is not False
    return ConeCheckReport(inside, tried, bad_in, bad_out, exact_match, t_cap, passed)


def _exact_poly_cone_check(D: HPoly, cone: cones.Cone, rng, trials: int = 100) -> bool:
    """Compare `cone` with {u : A u <= 0} for the facet form of D, in rationals.

    Test vectors are small random integer vectors plus the extreme rays and
    lineality basis of {A u <= 0}, so boundary directions are exercised.
    """
    own = D.asymptotic_cone()
    tests = [list(r) for r in own.rays_exact()] + [list(v) for v in own.lineality_basis_exact()]
    tests += [[-v for v in r] for r in own.lineality_basis_exact()]
    tests += [[Fraction(int(rng.integers(-3, 4))) for _ in range(D.n)] for _ in range(trials)]
    x = list(D.witness_exact)
    for u in tests:
        in_cone = all(exact.dot(r, u) <= 0 for r in D.A)
        if cone.contains(u) != in_cone:
            return False
        if all(v == 0 for v in u):
            continue
        if in_cone:
            t = Fraction(int(rng.integers(0, 10**4 + 1)))
            if D.contains([a + t * b for a, b in zip(x, u)]) != Membership.INTERIOR:
                return False
        elif D._exit(x, u) == INF:
            return False
    return True
