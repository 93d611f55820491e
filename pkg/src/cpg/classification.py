"""Affine classification of quasi-homogeneous convex domains in dimension 2 to 4.

Quasi-homogeneity cannot be decided from a membership oracle, so the
classifier first checks necessary conditions (unbounded, not between two
parallel hyperplanes, no bounded face of positive dimension) and then
walks the case analysis: strip the lineality space R^k, measure the
asymptotic cone of the properly convex factor, and split into the
paraboloid family (one asymptotic direction), cones (full asymptotic
cone) and the parabola x R+ family (two asymptotic directions in
dimension 3).

Whenever the label has a canonical representative, the result carries an
affine witness W with W(D) equal to that representative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from cpg import exact
from cpg.domains import (
    INF,
    ConvexDomain,
    DomainError,
    HPoly,
    Membership,
    Paraboloid,
    Product,
    halfspace,
    simplex_cone,
    space,
)
from cpg.geometry import classify_convexity
from cpg.linalg import complement, distinct_directions, orthonormal_basis


class Label(str, Enum):
    PLANE = "PLANE"
    HALF_PLANE = "HALF_PLANE"
    QUADRANT = "QUADRANT"
    PARABOLA = "PARABOLA"
    SPACE_3 = "SPACE_3"
    HALF_SPACE_3 = "HALF_SPACE_3"
    PARABOLA_x_R = "PARABOLA_x_R"
    QUADRANT_x_R = "QUADRANT_x_R"
    PARABOLA_x_RPLUS = "PARABOLA_x_RPLUS"
    PARABOLOID_3 = "PARABOLOID_3"
    SIMPLEX_CONE_3 = "SIMPLEX_CONE_3"
    STRICT_CONE_3 = "STRICT_CONE_3"
    SPACE_4 = "SPACE_4"
    HALF_SPACE_4 = "HALF_SPACE_4"
    PARABOLA_x_R2 = "PARABOLA_x_R2"
    QUADRANT_x_R2 = "QUADRANT_x_R2"
    PARABOLOID_3_x_R = "PARABOLOID_3_x_R"
    PARABOLA_x_RPLUS_x_R = "PARABOLA_x_RPLUS_x_R"
    PROPER_CONE_3_x_R = "PROPER_CONE_3_x_R"
    PROPER_CONE_4 = "PROPER_CONE_4"
    PARABOLOID_4 = "PARABOLOID_4"
    NOT_CLASSIFIED = "NOT_CLASSIFIED"


PARABOLOID_FAMILY = {
    Label.PARABOLA, Label.PARABOLA_x_R, Label.PARABOLA_x_R2,
    Label.PARABOLOID_3, Label.PARABOLOID_3_x_R, Label.PARABOLOID_4,
}
RESIDUAL = {Label.STRICT_CONE_3, Label.PROPER_CONE_3_x_R, Label.PROPER_CONE_4}

# Canonical coordinate order of each label: blocks "lin" (R^k factor),
# "slack" (positive coordinates of a polyhedral cone), "para" (gamma..., tau
# with tau > |gamma|^2) and "zeta" (the R+ coordinate of parabola x R+).
LAYOUT = {
    Label.PLANE: ("lin",),
    Label.SPACE_3: ("lin",),
    Label.SPACE_4: ("lin",),
    Label.HALF_PLANE: ("lin", "slack"),
    Label.HALF_SPACE_3: ("lin", "slack"),
    Label.HALF_SPACE_4: ("lin", "slack"),
    Label.QUADRANT: ("slack",),
    Label.QUADRANT_x_R: ("slack", "lin"),
    Label.QUADRANT_x_R2: ("lin", "slack"),
    Label.SIMPLEX_CONE_3: ("slack",),
    Label.PARABOLA: ("para",),
    Label.PARABOLA_x_R: ("para", "lin"),
    Label.PARABOLA_x_R2: ("lin", "para"),
    Label.PARABOLOID_3: ("para",),
    Label.PARABOLOID_3_x_R: ("lin", "para"),
    Label.PARABOLOID_4: ("para",),
    Label.PARABOLA_x_RPLUS: ("para", "zeta"),
    Label.PARABOLA_x_RPLUS_x_R: ("lin", "zeta", "para"),
}


def canonical_domain(label: Label) -> ConvexDomain | None:
    """The standard representative of a label, or None for residual families."""
    P2 = Paraboloid(2)
    table = {
        Label.PLANE: lambda: space(2),
        Label.HALF_PLANE: lambda: halfspace(2),
        Label.QUADRANT: lambda: simplex_cone(2),
        Label.PARABOLA: lambda: P2,
        Label.SPACE_3: lambda: space(3),
        Label.HALF_SPACE_3: lambda: halfspace(3),
        Label.PARABOLA_x_R: lambda: Product((P2, space(1))),
        Label.QUADRANT_x_R: lambda: Product((simplex_cone(2), space(1))),
        Label.PARABOLA_x_RPLUS: lambda: Product((P2, halfspace(1))),
        Label.PARABOLOID_3: lambda: Paraboloid(3),
        Label.SIMPLEX_CONE_3: lambda: simplex_cone(3),
        Label.SPACE_4: lambda: space(4),
        Label.HALF_SPACE_4: lambda: halfspace(4),
        Label.PARABOLA_x_R2: lambda: Product((space(2), P2)),
        Label.QUADRANT_x_R2: lambda: Product((space(2), simplex_cone(2))),
        Label.PARABOLOID_3_x_R: lambda: Product((space(1), Paraboloid(3))),
        Label.PARABOLA_x_RPLUS_x_R: lambda: Product((space(1), halfspace(1), P2)),
        Label.PARABOLOID_4: lambda: Paraboloid(4),
    }
    make = table.get(label)
    return make() if make else None


@dataclass(frozen=True)
class AffineMap:
    """x -> linear @ x + translation; exact when built from rationals."""

    linear: tuple
    translation: tuple
    exact: bool

    @staticmethod
    def from_rows(M, c) -> AffineMap:
        rows = [list(r) for r in M]
        try:
            if exact.is_rational_vector(np.asarray(c, dtype=object)) and all(
                exact.is_rational_vector(np.asarray(r, dtype=object)) for r in rows
            ):
                return AffineMap(tuple(tuple(exact.frac_vector(r)) for r in rows), tuple(exact.frac_vector(c)), True)
        except TypeError:
            pass
        return AffineMap(
            tuple(tuple(float(v) for v in r) for r in rows), tuple(float(v) for v in c), False
        )

    @property
    def n(self) -> int:
        return len(self.translation)

    def matrix(self) -> np.ndarray:
        return np.array(self.linear, dtype=float).reshape(self.n, self.n)

    def offset(self) -> np.ndarray:
        return np.array(self.translation, dtype=float)

    def __call__(self, x):
        if self.exact and exact.is_rational_vector(np.asarray(x, dtype=object)):
            xr = exact.frac_vector(x)
            return np.array([exact.dot(r, xr) + c for r, c in zip(self.linear, self.translation)], dtype=object)
        return self.matrix() @ np.asarray(x, dtype=float) + self.offset()

    def apply_many(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.matrix().T + self.offset()

    def inverse(self) -> AffineMap:
        if self.exact:
            Li = exact.inverse([list(r) for r in self.linear])
            return AffineMap(tuple(map(tuple, Li)), tuple(-v for v in exact.matvec(Li, list(self.translation))), True)
        Li = np.linalg.inv(self.matrix())
        return AffineMap.from_rows(Li, -Li @ self.offset())

    def to_json(self) -> dict:
        fmt = (lambda v: v.numerator if v.denominator == 1 else [v.numerator, v.denominator]) if self.exact else float
        return {
            "linear": [[fmt(v) for v in r] for r in self.linear],
            "translation": [fmt(v) for v in self.translation],
            "exact": self.exact,
        }


@dataclass(frozen=True)
class InvariantProfile:
    n: int
    k: int
    proper_factor_dim: int
    ac_dim: int
    is_cone: bool
    strictly_convex: bool
    properly_convex: bool
    polyhedral: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CanonicalClass:
    label: Label
    profile: InvariantProfile | None
    witness: AffineMap | None = None
    reason: str | None = None
    notes: list = field(default_factory=list)

    def to_json(self, with_witness: bool = True) -> dict:
        out = {
            "label": self.label.value,
            "profile": self.profile.to_json() if self.profile else None,
            "reason": self.reason,
        }
        if with_witness:
            out["witness"] = self.witness.to_json() if self.witness else None
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def invariant_profile(D: ConvexDomain) -> InvariantProfile:
    k = D.lineality().shape[0]
    cone = D.asymptotic_cone()
    ac = cone.span_basis().shape[0] - k
    conv = classify_convexity(D)
    return InvariantProfile(
        n=D.n,
        k=k,
        proper_factor_dim=D.n - k,
        ac_dim=ac,
        is_cone=D.cone_apex() is not None,
        strictly_convex=bool(D.strictly_convex_mod_lineality and D.n - k > 0),
        properly_convex=conv.properly_convex,
        polyhedral=D.as_hpoly() is not None,
    )


def _not_classified(profile, reason) -> CanonicalClass:
    return CanonicalClass(Label.NOT_CLASSIFIED, profile, None, reason)


def classify(D: ConvexDomain, witness: bool = True) -> CanonicalClass:
    n = D.n
    if n < 2 or n > 4:
        return _not_classified(None, f"dimension {n} is outside the classified range 2..4")
    B = D.bounded_directions()
    if B.shape[0] == n:
        return _not_classified(None, "bounded domain cannot be quasi-homogeneous")
    if B.shape[0] > 0:
        return _not_classified(None, "domain lies between parallel hyperplanes")
    if D.bounded_face_info().positive:
        return _not_classified(None, "domain has a bounded face of positive dimension")
    prof = invariant_profile(D)
    label, reason = _decide(D, prof)
    if label == Label.NOT_CLASSIFIED:
        return _not_classified(prof, reason)
    result = CanonicalClass(label, prof)
    if witness and label not in RESIDUAL:
        try:
            result.witness = build_witness(D, label)
        except (DomainError, np.linalg.LinAlgError, ValueError) as err:
            result.notes.append(f"witness construction failed: {err}")
    return result


def _decide(D: ConvexDomain, p: InvariantProfile) -> tuple[Label, str | None]:
    n, m, ac = p.n, p.proper_factor_dim, p.ac_dim
    if m == 0:
        return {2: Label.PLANE, 3: Label.SPACE_3, 4: Label.SPACE_4}[n], None
    if m == 1:
        return {2: Label.HALF_PLANE, 3: Label.HALF_SPACE_3, 4: Label.HALF_SPACE_4}[n], None
    if ac == 1:
        if not p.strictly_convex:
            return Label.NOT_CLASSIFIED, "one asymptotic direction but the boundary contains segments"
        table = {
            (2, 2): Label.PARABOLA, (3, 2): Label.PARABOLA_x_R, (4, 2): Label.PARABOLA_x_R2,
            (3, 3): Label.PARABOLOID_3, (4, 3): Label.PARABOLOID_3_x_R, (4, 4): Label.PARABOLOID_4,
        }
        return table[(n, m)], None
    if ac == m:
        if not p.is_cone:
            return Label.NOT_CLASSIFIED, "asymptotic cone is full-dimensional but the domain is not a cone"
        if m == 2:
            return {2: Label.QUADRANT, 3: Label.QUADRANT_x_R, 4: Label.QUADRANT_x_R2}[n], None
        if m == 3:
            if p.polyhedral:
                if not _simplicial(D, m):
                    return Label.NOT_CLASSIFIED, "polyhedral cone that is not simplicial cannot be quasi-homogeneous"
                return (Label.SIMPLEX_CONE_3 if n == 3 else Label.PROPER_CONE_3_x_R), None
            return (Label.STRICT_CONE_3 if n == 3 else Label.PROPER_CONE_3_x_R), None
        if m == 4:
            if p.polyhedral and not _simplicial(D, m):
                return Label.NOT_CLASSIFIED, "polyhedral cone that is not simplicial cannot be quasi-homogeneous"
            return Label.PROPER_CONE_4, None
    if m == 3 and ac == 2:
        if p.is_cone:
            return Label.NOT_CLASSIFIED, "cone with lower-dimensional asymptotic cone"
        return (Label.PARABOLA_x_RPLUS if n == 3 else Label.PARABOLA_x_RPLUS_x_R), None
    return Label.NOT_CLASSIFIED, f"no canonical form with proper factor dimension {m} and asymptotic cone dimension {ac}"


def _simplicial(D: ConvexDomain, m: int) -> bool:
    P = D.as_hpoly().irredundant()
    return P.m == m and exact.rank(P.rows()) == m


# ---------------------------------------------------------------------------
# witnesses


def build_witness(D: ConvexDomain, label: Label) -> AffineMap:
    layout = LAYOUT[label]
    P = D.as_hpoly()
    if "para" in layout:
        blocks = _parabolic_blocks(D, "zeta" in layout)
    elif P is not None:
        blocks = _polyhedral_blocks(P)
    else:
        blocks = _ray_cone_blocks(D)
    rows, consts = [], []
    for name in layout:
        M, c = blocks[name]
        rows.extend(M)
        consts.extend(c)
    W = AffineMap.from_rows(rows, consts)
    if W.exact:
        exact.inverse([list(r) for r in W.linear])  # raises if singular
    elif abs(np.linalg.det(W.matrix())) <= 1e-12:
        raise DomainError("assembled witness is singular")
    return W


def _polyhedral_blocks(P: HPoly) -> dict:
    Q = P.irredundant()
    L = Q.lineality_exact()
    slack = ([[-a for a in r] for r in Q.rows()], list(Q.b))
    lin = ([list(r) for r in L], [Fraction(0)] * len(L))
    return {"slack": slack, "lin": lin}


def _ray_cone_blocks(D: ConvexDomain) -> dict:
    apex = np.asarray(D.cone_apex(), dtype=float)
    L = orthonormal_basis(D.lineality(), D.n)
    C = complement(L, D.n)
    rays, _ = D.asymptotic_cone().extreme_rays()
    rays = distinct_directions([C.T @ (C @ r) for r in rays], 1e-9)
    basis = np.vstack([L, np.array(rays)]) if rays else L
    G = np.linalg.inv(basis.T)
    k = L.shape[0]
    return {
        "lin": (G[:k].tolist(), (-G[:k] @ apex).tolist()),
        "slack": (G[k:].tolist(), (-G[k:] @ apex).tolist()),
    }


def _unique_normal(D: ConvexDomain, b: np.ndarray) -> np.ndarray:
    dirs = distinct_directions(D.normals_at(b), 1e-7)
    if len(dirs) != 1:
        raise DomainError("boundary is not smooth at the base point")
    return dirs[0]


def _graph_height(D: ConvexDomain, base: np.ndarray, v: np.ndarray) -> float:
    """Height above `base` along v at which the boundary is crossed, found from above."""
    T = 1.0
    for _ in range(60):
        start = base + T * v
        if D.contains(start) == Membership.INTERIOR:
            t = D._exit(start, -v)
            if t == INF:
                raise DomainError("line along the asymptotic direction does not meet the boundary")
            return T - float(t)
        T *= 2.0
    raise DomainError("could not find an interior point above the base")


def _oriented(B: np.ndarray) -> np.ndarray:
    """Flip rows so that each row's largest entry (first on ties) is positive."""
    B = np.array(B, dtype=float)
    for i, r in enumerate(B):
        j = int(np.argmax(np.abs(r) > np.max(np.abs(r)) * (1 - 1e-9)))
        if r[j] < 0:
            B[i] = -r
    return B


def _asymptotic_rays(D: ConvexDomain, L: np.ndarray) -> list[np.ndarray]:
    C = complement(L, D.n)
    rays, _ = D.asymptotic_cone().extreme_rays()
    return distinct_directions([C.T @ (C @ r) for r in rays], 1e-9)


def _is_flat_ray(D: ConvexDomain, r: np.ndarray, rng: np.random.Generator) -> tuple[bool, np.ndarray, np.ndarray]:
    normals, point = [], None
    for x in D.sample_interior(rng, 4):
        t = D._exit(x, -r)
        if t == INF:
            return False, None, None
        b = x - float(t) * r
        normals.append(_unique_normal(D, b))
        point = b
    flat = all(abs(abs(normals[0] @ v) - 1) <= 1e-8 for v in normals[1:])
    return flat, normals[0], point


def _parabolic_blocks(D: ConvexDomain, with_flat_ray: bool) -> dict:
    n = D.n
    L = _oriented(orthonormal_basis(D.lineality(), n))
    rays = _asymptotic_rays(D, L)
    zeta = None
    if with_flat_ray:
        if len(rays) != 2:
            raise DomainError("expected two asymptotic rays")
        rng = np.random.default_rng(12345)
        flags = [_is_flat_ray(D, r, rng) for r in rays]
        flat = [i for i, f in enumerate(flags) if f[0]]
        if len(flat) != 1:
            raise DomainError("expected exactly one asymptotic ray transverse to a flat facet")
        j = flat[0]
        r2, (_, nu2, p2) = rays[j], flags[j]
        v = rays[1 - j]
        s = nu2 @ r2
        zeta = (nu2 / s, -(nu2 @ p2) / s)
    else:
        if len(rays) != 1:
            raise DomainError("expected a single asymptotic ray")
        v = rays[0]
    v = v / np.linalg.norm(v)
    x0 = np.asarray(D.witness, dtype=float)
    t = D._exit(x0, -v)
    if t == INF:
        raise DomainError("asymptotic ray does not meet the boundary")
    b = x0 - float(t) * v
    nu = _unique_normal(D, b)
    # tangent directions: along the boundary at b and, with a flat facet, inside its level sets
    excluded = [nu] + list(L) + ([nu2] if with_flat_ray else [])
    C = _oriented(complement(np.array(excluded), n))
    d = C.shape[0]
    # second-order form of the graph over b + C gamma along v
    h = lambda g: _graph_height(D, b + C.T @ g, v)
    E = np.eye(d)
    Qf = np.zeros((d, d))
    diag = [h(E[i]) for i in range(d)]
    for i in range(d):
        Qf[i, i] = diag[i]
        for j in range(i):
            Qf[i, j] = Qf[j, i] = 0.5 * (h(E[i] + E[j]) - diag[i] - diag[j])
    R = np.linalg.cholesky(Qf)  # Qf = R R^T
    basis = [L, C, v[None, :]] + ([r2[None, :]] if with_flat_ray else [])
    Bm = np.vstack([blk for blk in basis if blk.shape[0]])
    G = np.linalg.inv(Bm.T)  # coordinates of x - b in the basis
    k = L.shape[0]
    G_L, G_C, G_v = G[:k], G[k : k + d], G[k + d : k + d + 1]
    para = np.vstack([R.T @ G_C, G_v])
    out = {"lin": (G_L.tolist(), (-G_L @ b).tolist()), "para": (para.tolist(), (-para @ b).tolist())}
    if zeta is not None:
        out["zeta"] = ([zeta[0].tolist()], [float(zeta[1])])
    return out


# ---------------------------------------------------------------------------
# witness verification


@dataclass
class WitnessReport:
    points: int
    disagreements: int
    ignored_near_boundary: int
    exact: bool
    passed: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _probe_cloud(D: ConvexDomain, rng: np.random.Generator, count: int) -> np.ndarray:
    third = max(1, count // 3)
    inner = D.sample_interior(rng, third)
    try:
        bd = D.sample_boundary(rng, third)
        scale = 1 + np.linalg.norm(bd, axis=1)[:, None]
        bd = bd + 1e-3 * scale * rng.standard_normal(bd.shape)
    except DomainError:
        bd = np.zeros((0, D.n))
    rest = count - inner.shape[0] - bd.shape[0]
    spread = 2.0 * (1.0 + np.max(np.abs(inner))) if inner.size else 2.0
    gauss = rng.standard_normal((rest, D.n)) * spread
    return np.vstack([inner, bd, gauss])


def verify_witness(D: ConvexDomain, result: CanonicalClass, points: int = 1000, seed: int = 0, band: float = 1e-8) -> WitnessReport:
    """Two-sided membership agreement between D and W^{-1}(canonical representative).

    Points come from D (interior samples, perturbed boundary samples,
    Gaussians) and from the canonical domain pulled back through W. For
    exact witnesses the points are rounded to rationals and membership is
    compared exactly; otherwise a disagreement is ignored when either
    normalized value lies within `band` of zero.
    """
    W = result.witness
    target = canonical_domain(result.label)
    if W is None or target is None:
        raise DomainError("no witness to verify")
    rng = np.random.default_rng(seed)
    half = points // 2
    cloud = _probe_cloud(D, rng, half)
    Winv = W.inverse()
    back = Winv.apply_many(_probe_cloud(target, rng, points - half))
    X = np.vstack([cloud, back])
    bad = ignored = 0
    P, T = D.as_hpoly(), target.as_hpoly()
    if W.exact and P is not None and T is not None:
        pulled = _pull_back(T, W)
        num = np.array([[int(round(v * 1024)) for v in x] for x in X], dtype=object)
        bad = int(np.sum(_exact_codes(P, num, 1024) != _exact_codes(pulled, num, 1024)))
        return WitnessReport(X.shape[0], bad, 0, True, bad == 0)
    g1 = D.values(X)
    g2 = target.values(W.apply_many(X))
    for a, c in zip(g1, g2):
        m1 = 0 if a < -1e-9 else (2 if a > 1e-9 else 1)
        m2 = 0 if c < -1e-9 else (2 if c > 1e-9 else 1)
        if m1 != m2:
            if min(abs(a), abs(c)) <= band:
                ignored += 1
            else:
                bad += 1
    return WitnessReport(X.shape[0], bad, ignored, False, bad == 0)


def _pull_back(T: HPoly, W: AffineMap) -> HPoly:
    """{x : W(x) in T} as an H-polyhedron."""
    if T.m == 0:
        return T
    M = [list(r) for r in W.linear]
    A = exact.matmul(T.rows(), M)
    b = [bi - exact.dot(r, list(W.translation)) for r, bi in zip(T.rows(), T.b)]
    Wi = W.inverse()
    hint = [v + w for v, w in zip(exact.matvec([list(r) for r in Wi.linear], list(T.witness_exact)), Wi.translation)]
    return HPoly(tuple(map(tuple, A)), tuple(b), T.n, tuple(hint))


def _exact_codes(P: HPoly, num: np.ndarray, den: int) -> np.ndarray:
    """Membership codes of the points num/den, computed in integer arithmetic."""
    if P.m == 0:
        return np.zeros(num.shape[0], dtype=int)
    rows, rhs = [], []
    for r, bi in zip(P.A, P.b):
        scale = math.lcm(*(v.denominator for v in r), bi.denominator)
        rows.append([int(v * scale) for v in r])
        rhs.append(int(bi * scale) * den)
    S = num.dot(np.array(rows, dtype=object).T) - np.array(rhs, dtype=object)[None, :]
    pos = np.any(S > 0, axis=1)
    zero = np.any(S == 0, axis=1)
    return np.where(pos, 2, np.where(zero, 1, 0))


def random_rational_affine(rng: np.random.Generator, n: int, max_cond: float = 1e3) -> tuple[list, list]:
    """A random invertible rational affine map with small denominators and bounded condition number."""
    while True:
        M = [[Fraction(int(rng.integers(-8, 9)), int(rng.integers(1, 5))) for _ in range(n)] for _ in range(n)]
        Mf = np.array(exact.as_float(M), dtype=float)
        if abs(np.linalg.det(Mf)) < 1e-9:
            continue
        if np.linalg.cond(Mf) <= max_cond:
            a = [Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in range(n)]
            return M, a
