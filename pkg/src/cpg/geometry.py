"""Operations on convex domains: faces, conic faces, osculating forms, hulls, joins."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from cpg import exact
from cpg.domains import (
    ConvexDomain,
    ConvexSum,
    DomainError,
    FaceDescriptor,
    Hit,
    HPoly,
    Homogenized,
    Membership,
)
from cpg.linalg import complement, distinct_directions, span_dim


def contains(D: ConvexDomain, x) -> Membership:
    return D.contains(x)


def boundary_hit(D: ConvexDomain, x, u) -> Hit:
    return D.boundary_hit(x, u)


def face_of(D: ConvexDomain, b) -> FaceDescriptor:
    return D.face_of(b)


def homogenize(D: ConvexDomain) -> Homogenized:
    """The open cone over D at height t = 1."""
    return Homogenized(D)


class Lineality(NamedTuple):
    basis: np.ndarray
    k: int


def lineality_space(D: ConvexDomain) -> Lineality:
    B = D.lineality()
    return Lineality(B, B.shape[0])


class Convexity(NamedTuple):
    properly_convex: bool
    strictly_convex: bool


def classify_convexity(D: ConvexDomain) -> Convexity:
    """Proper convexity from lineality; strict convexity from the representation.

    Strict convexity means a properly convex domain whose affine boundary
    contains no segment, so it implies proper convexity; in particular R^n
    and every domain with a lineality line are not strictly convex.
    """
    k = D.lineality().shape[0]
    proper = k == 0 and D.asymptotic_cone().pointed
    strict = proper and D.strictly_convex_mod_lineality
    return Convexity(proper, strict)


def _same_face(D: ConvexDomain, F: FaceDescriptor) -> bool:
    try:
        G = D.face_of(F.representative)
    except DomainError:
        return False
    if G.dim != F.dim:
        return False
    ext = np.vstack([G.directions, (np.asarray(F.point, dtype=float) - np.asarray(G.point, dtype=float))[None, :]])
    return span_dim(ext, D.n, 1e-8) == G.dim and span_dim(np.vstack([G.directions, F.directions]), D.n, 1e-8) == G.dim


@dataclass(frozen=True)
class ConicVerdict:
    conic: bool
    chain: list = field(default_factory=list)  # normals ν_i of H_i = {ν_i·(x − b) = 0}
    normal_span_dim: int = 0
    needed: int = 0

    def __bool__(self) -> bool:
        return self.conic


def is_conic_face(D: ConvexDomain, F: FaceDescriptor) -> ConicVerdict:
    """Whether n - dim F supporting hyperplanes at F cut out its support in a strict chain.

    Every supporting hyperplane at a relative-interior point of F contains
    ⟨F⟩, so the chain exists exactly when the normal cone at the
    representative spans a space of dimension n - dim F. The witness chain
    is a greedy independent subset of the normal-cone generators.
    """
    if not _same_face(D, F):
        raise DomainError("F is not a face of D")
    N = D.normals_at(F.representative)
    needed = D.n - F.dim
    chain: list[np.ndarray] = []
    for v in N:
        if span_dim(chain + [v], D.n, 1e-9) > len(chain):
            chain.append(np.asarray(v, dtype=float))
    dim = len(chain)
    return ConicVerdict(dim == needed, chain if dim == needed else [], dim, needed)


@dataclass(frozen=True)
class OsculatingResult:
    osculating: bool
    form: np.ndarray | None
    reason: str
    estimates: tuple = ()
    disagreement: float = float("nan")

    def __bool__(self) -> bool:
        return self.osculating


def _local_graph(D: ConvexDomain, b: np.ndarray, nu: np.ndarray, C: np.ndarray):
    """f(w): depth of the boundary below the tangent plane at b + C^T w."""
    scale = 1.0 + float(np.linalg.norm(b))

    def f(w):
        base = b + C.T @ w
        for H in (0.25, 0.05, 1.0, 0.01, 4.0, 0.002):
            p = base - H * scale * nu
            if D.contains(p) == Membership.INTERIOR:
                t = float(D._exit(p, nu))
                if t == float("inf"):
                    raise DomainError("local graph probe escaped to infinity")
                return H * scale - t
        raise DomainError("boundary is not locally a graph over the tangent plane")

    return f


def _hessian(f, d: int, h: float) -> np.ndarray:
    Hm = np.zeros((d, d))
    E = np.eye(d)
    f0 = f(np.zeros(d))
    for i in range(d):
        Hm[i, i] = (f(h * E[i]) - 2 * f0 + f(-h * E[i])) / h**2
        for j in range(i):
            pp, pm = f(h * (E[i] + E[j])), f(h * (E[i] - E[j]))
            mp, mm = f(h * (-E[i] + E[j])), f(-h * (E[i] + E[j]))
            Hm[i, j] = Hm[j, i] = (pp - pm - mp + mm) / (4 * h**2)
    return Hm


def osculating_ellipsoid_test(D: ConvexDomain, b, h: float = 1e-2, tol: float = 1e-4) -> OsculatingResult:
    """Second-order contact test at a boundary point.

    The boundary is written as a graph over the tangent plane and its
    Hessian is estimated by central second differences at h, h/2, h/4 with
    one Richardson step. Returns the quadratic form Q (the local boundary is
    w^T Q w to second order) when it is positive definite and the two
    extrapolated estimates agree within `tol`.
    """
    b = np.asarray(b, dtype=float)
    N = D.normals_at(b)
    dirs = distinct_directions(N, 1e-7)
    if len(dirs) != 1:
        return OsculatingResult(False, None, "corner")
    nu = dirs[0]
    C = complement(nu[None, :], D.n)
    d = C.shape[0]
    if d == 0:
        return OsculatingResult(True, np.zeros((0, 0)), "ok")
    f = _local_graph(D, b, nu, C)
    try:
        H1, H2, H4 = (_hessian(f, d, h / s) for s in (1, 2, 4))
    except DomainError as err:
        return OsculatingResult(False, None, str(err))
    R1 = (4 * H2 - H1) / 3
    R2 = (4 * H4 - H2) / 3
    gap = float(np.max(np.abs(R1 - R2)))
    Q = 0.5 * R2
    estimates = (0.5 * H1, 0.5 * H2, 0.5 * H4)
    if gap > tol * max(1.0, float(np.max(np.abs(R2)))):
        return OsculatingResult(False, Q, "second differences not consistent", estimates, gap)
    eig = np.linalg.eigvalsh(Q)
    if np.max(np.abs(eig)) <= 1e-6:
        return OsculatingResult(False, Q, "degenerate", estimates, gap)
    if eig[0] <= 1e-6 * max(1.0, eig[-1]):
        return OsculatingResult(False, Q, "degenerate", estimates, gap)
    return OsculatingResult(True, Q, "ok", estimates, gap)


def convex_hull(points) -> HPoly:
    """Facet description of the interior of the convex hull (exact over the rationals)."""
    pts = [exact.frac_vector(p) for p in points]
    if not pts:
        raise DomainError("no points")
    n = len(pts[0])
    diffs = [[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]
    d = exact.rank(diffs) if diffs else 0
    if d < n:
        raise DomainError(f"degenerate point set: affine span has dimension {d}")
    facets: dict[tuple, None] = {}
    for idx in itertools.combinations(range(len(pts)), n):
        M = [list(pts[i]) + [Fraction(1)] for i in idx]
        null = exact.nullspace(M, n + 1)
        if len(null) != 1:
            continue
        a, c = null[0][:n], -null[0][n]  # a.x = c on the chosen points
        side = [exact.dot(a, p) - c for p in pts]
        if all(s <= 0 for s in side):
            row = exact.primitive(list(a) + [c])
        elif all(s >= 0 for s in side):
            row = exact.primitive([-v for v in a] + [-c])
        else:
            continue
        facets[tuple(row)] = None
    A = tuple(r[:n] for r in facets)
    rhs = tuple(r[n] for r in facets)
    return HPoly(A, rhs, n)


def convex_sum(D1: ConvexDomain, D2: ConvexDomain, embedding) -> ConvexSum:
    """Join of D1 and D2 placed by affine maps ((M1, c1), (M2, c2)) into R^n."""
    (M1, c1), (M2, c2) = embedding
    return ConvexSum(D1, M1, c1, D2, M2, c2)
