"""Convex domains in R^n behind one interface.

Each representation implements a normalized value function (negative
inside, zero on the boundary, positive outside), ray exits, its asymptotic
cone, lineality space, normal cones and faces. Polyhedra are exact over
the rationals; quadrics use closed-form roots; products, affine images,
homogenizations, projective images and convex sums delegate to their
parts.

Membership of floating-point input uses a boundary band: a point counts
as boundary when its normalized value is within ``EPS`` of zero. The
normalization divides by the magnitude of the terms in the defining
expression, so the band scales with the point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np

from cpg import cones, exact, polyhedral
from cpg.linalg import as_rows, complement, orthonormal_basis
from cpg.projective import ProjectivePoint, ProjectiveSubspace

EPS = 1e-9
INF = float("inf")


class DomainError(ValueError):
    pass


class Membership(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


_CODES = (Membership.INTERIOR, Membership.BOUNDARY, Membership.OUTSIDE)


class Hit(NamedTuple):
    """Exit parameter and exit point; `hit` is a ProjectivePoint when t is infinite."""

    t: float | Fraction
    hit: np.ndarray | ProjectivePoint

    @property
    def finite(self) -> bool:
        return self.t != INF


def _rational(x) -> list[Fraction] | None:
    if isinstance(x, np.ndarray) and x.dtype != object:
        if x.dtype.kind not in "iu":
            return None
    try:
        if exact.is_rational_vector(x):
            return exact.frac_vector(np.asarray(x, dtype=object).ravel())
    except TypeError:
        return None
    return None


def _obj(v) -> np.ndarray:
    return np.array(list(v), dtype=object)


def _quadratic_exit(a: float, b: float, c: float) -> float:
    """Smallest t > 0 with a t^2 + b t + c = 0, given c < 0 (inside at t = 0)."""
    if abs(a) <= 1e-300:
        return -c / b if b > 0 else INF
    disc = b * b - 4 * a * c
    if disc < 0:
        return INF
    sq = np.sqrt(disc)
    # stable pair of roots
    q = -0.5 * (b + np.copysign(sq, b)) if b != 0 else -0.5 * sq * np.sign(a) if a != 0 else 0.0
    roots = []
    if q != 0:
        roots.append(c / q)
    if a != 0:
        roots.append(q / a)
    pos = [r for r in roots if r > 0]
    return min(pos) if pos else INF


def _quadratic_exits(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Row-wise `_quadratic_exit`."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lin = np.where(b > 0, -c / b, np.inf)
        disc = b * b - 4 * a * c
        sq = np.sqrt(np.maximum(disc, 0.0))
        sgn = np.where(b != 0, np.sign(b), np.sign(a))
        q = -0.5 * (b + sgn * sq)
        r1 = np.where(q != 0, c / q, np.nan)
        r2 = np.where(a != 0, q / a, np.nan)
        r1 = np.where(r1 > 0, r1, np.inf)
        r2 = np.where(r2 > 0, r2, np.inf)
        quad = np.where(disc < 0, np.inf, np.minimum(r1, r2))
    return np.where(np.abs(a) <= 1e-300, lin, quad)


def _first_positive_root(a: float, b: float, c: float) -> float:
    """Smallest t > 0 with a t^2 + b t + c = 0, given c > 0 (inside means q > 0)."""
    return _quadratic_exit(-a, -b, -c)


@dataclass(frozen=True)
class FaceDescriptor:
    """A face reported through its affine support.

    `point` and the rows of `directions` span the support; `bounded` says
    whether the closure of the face is compact in R^n.
    """

    representative: np.ndarray
    point: np.ndarray
    directions: np.ndarray
    bounded: bool

    @property
    def dim(self) -> int:
        return self.directions.shape[0]

    @property
    def support(self) -> ProjectiveSubspace:
        n = self.point.size
        rows = [np.append(np.asarray(self.point, dtype=float), 1.0)]
        rows += [np.append(np.asarray(d, dtype=float), 0.0) for d in self.directions]
        return ProjectiveSubspace(np.array(rows), n)

    def support_contains(self, x, tol: float = 1e-8) -> bool:
        d = np.asarray(x, dtype=float) - np.asarray(self.point, dtype=float)
        if self.dim == 0:
            return np.linalg.norm(d) <= tol * (1 + np.linalg.norm(x))
        Q = orthonormal_basis(np.asarray(self.directions, dtype=float), d.size)
        return np.linalg.norm(d - Q.T @ (Q @ d)) <= tol * (1 + np.linalg.norm(x))

    def to_json(self) -> dict:
        return {
            "representative": [float(v) for v in self.representative],
            "point": [float(v) for v in self.point],
            "directions": np.asarray(self.directions, dtype=float).tolist(),
            "dim": self.dim,
            "bounded": bool(self.bounded),
        }


@dataclass(frozen=True)
class BoundedFaceInfo:
    """Which bounded faces the closure has: 0-dim, positive-dim, and the domain itself."""

    vertex: bool
    positive: bool
    whole_bounded: bool


def _fmt_number(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else [v.numerator, v.denominator]
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _fmt_matrix(M) -> list:
    return [[_fmt_number(v) for v in row] for row in M]


class ConvexDomain:
    """Common behaviour. Subclasses set `n` and implement `values` and `_exit`."""

    n: int

    # -- membership ---------------------------------------------------
    def values(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, x) -> float:
        return float(self.values(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def _check_dim(self, x) -> None:
        if np.size(x) != self.n:
            raise DomainError(f"dimension mismatch: domain in R^{self.n}, point has {np.size(x)} coordinates")

    def contains(self, x) -> Membership:
        self._check_dim(x)
        g = self.value(x)
        if g < -EPS:
            return Membership.INTERIOR
        if g > EPS:
            return Membership.OUTSIDE
        return Membership.BOUNDARY

    def contains_many(self, X: np.ndarray) -> np.ndarray:
        """Membership codes 0 (interior), 1 (boundary), 2 (outside) for rows of X."""
        g = self.values(np.asarray(X, dtype=float))
        return np.where(g < -EPS, 0, np.where(g > EPS, 2, 1))

    def closure_contains(self, x) -> bool:
        return self.contains(x) != Membership.OUTSIDE

    def outside_distance(self, y) -> float:
        """Length of the part of the segment witness->y lying outside the closure."""
        y = np.asarray(y, dtype=float)
        w = np.asarray(self.witness, dtype=float)
        d = y - w
        if np.linalg.norm(d) == 0:
            return 0.0
        t = float(self._exit(w, d))
        return 0.0 if t >= 1 else (1 - t) * float(np.linalg.norm(d))

    # -- rays ---------------------------------------------------------
    def _exit(self, x, u):
        raise NotImplementedError

    def boundary_hit(self, x, u) -> Hit:
        self._check_dim(x)
        self._check_dim(u)
        if all(v == 0 for v in np.asarray(u, dtype=object).ravel()):
            raise DomainError("direction must be nonzero")
        if self.contains(x) != Membership.INTERIOR:
            raise DomainError("x is not an interior point")
        return self._hit(x, u)

    def _hit(self, x, u) -> Hit:
        t = self._exit(x, u)
        if t == INF:
            return Hit(INF, ProjectivePoint.at_infinity(np.asarray(u)))
        rx, ru = _rational(x), _rational(u)
        if rx is not None and ru is not None and isinstance(t, Fraction):
            return Hit(t, _obj(a + t * b for a, b in zip(rx, ru)))
        t = float(t)
        return Hit(t, np.asarray(x, dtype=float) + t * np.asarray(u, dtype=float))

    # -- structure ----------------------------------------------------
    @property
    def witness(self) -> np.ndarray:
        raise NotImplementedError

    def asymptotic_cone(self) -> cones.Cone:
        raise NotImplementedError

    def lineality(self) -> np.ndarray:
        raise NotImplementedError

    def bounded_directions(self) -> np.ndarray:
        """Basis of the linear functionals bounded above and below on the domain."""
        raise NotImplementedError

    def normals_at(self, b) -> np.ndarray:
        """Generators of the outward normal cone at a boundary point."""
        raise NotImplementedError

    def face_of(self, b) -> FaceDescriptor:
        raise NotImplementedError

    @property
    def strictly_convex_mod_lineality(self) -> bool:
        """No segment in the boundary of the properly convex factor."""
        raise NotImplementedError

    def bounded_face_info(self) -> BoundedFaceInfo:
        raise NotImplementedError

    def cone_apex(self) -> np.ndarray | None:
        """A point p with domain = p + AC, or None when the domain is not a cone."""
        raise NotImplementedError

    def as_hpoly(self) -> HPoly | None:
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def _require_boundary(self, b) -> None:
        self._check_dim(b)
        if self.contains(b) != Membership.BOUNDARY:
            raise DomainError("point is not on the boundary")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConvexDomain):
            return NotImplemented
        return self.to_json() == other.to_json()

    def __hash__(self):
        return hash((type(self).__name__, self.n))

    # -- sampling -----------------------------------------------------
    def sample_interior(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return self._hit_and_run(rng, m)

    def _hit_and_run(self, rng: np.random.Generator, m: int, steps: int = 30) -> np.ndarray:
        # m chains from the witness, advanced together
        x0 = np.asarray(self.witness, dtype=float)
        reach = 3.0 * (1.0 + np.linalg.norm(x0))
        X = np.tile(x0, (m, 1))
        for _ in range(steps):
            U = rng.standard_normal((m, self.n))
            U /= np.linalg.norm(U, axis=1)[:, None]
            hi = np.minimum(self.exits(X, U), reach)
            lo = np.minimum(self.exits(X, -U), reach)
            s = 0.98 * (-lo + rng.uniform(size=m) * (hi + lo))
            Y = X + s[:, None] * U
            ok = self.contains_many(Y) == 0
            X[ok] = Y[ok]
        return X

    def sample_boundary(self, rng: np.random.Generator, m: int) -> np.ndarray:
        found: list[np.ndarray] = []
        total = 0
        for rounds in range(1, 21):
            if rounds > 2 and not total:
                break
            X = self.sample_interior(rng, max(m, 8))
            U = rng.standard_normal(X.shape)
            U /= np.linalg.norm(U, axis=1)[:, None]
            T = self.exits(X, U)
            fin = np.isfinite(T)
            B = X[fin] + T[fin, None] * U[fin]
            B = B[self.contains_many(B) == 1] if B.size else B
            found.append(B)
            total += B.shape[0]
            if total >= m:
                return np.vstack(found)[:m]
        raise DomainError("could not sample boundary points (domain may have empty boundary)")

    def exits(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Row-wise float `_exit`."""
        return np.array([float(self._exit(x, u)) for x, u in zip(X, U)])


# ---------------------------------------------------------------------------
# polyhedra


@dataclass(frozen=True, eq=False)
class HPoly(ConvexDomain):
    """Interior of {x : A x < b}; exact rationals throughout."""

    A: tuple
    b: tuple
    n: int = -1
    hint: tuple | None = field(default=None, compare=False, repr=False)  # candidate interior point

    def __post_init__(self):
        A = exact.frac_matrix(self.A)
        b = exact.frac_vector(self.b)
        n = self.n if self.n >= 0 else (len(A[0]) if A else -1)
        if n < 0:
            raise DomainError("hpoly with no rows needs an explicit dimension n")
        if any(len(r) != n for r in A) or len(b) != len(A):
            raise DomainError("hpoly: A must be m x n and b must have m entries")
        object.__setattr__(self, "A", tuple(tuple(r) for r in A))
        object.__setattr__(self, "b", tuple(b))
        object.__setattr__(self, "n", n)
        w = None
        if self.hint is not None:
            h = exact.frac_vector(self.hint)
            if len(h) == n and all(exact.dot(r, h) < bi for r, bi in zip(A, b)):
                w = h
        if w is None:
            w = polyhedral.interior_point([list(r) for r in A], b, n)
        if w is None:
            raise DomainError("hpoly has empty interior")
        object.__setattr__(self, "_witness", tuple(w))

    @property
    def m(self) -> int:
        return len(self.A)

    @cached_property
    def _Af(self) -> np.ndarray:
        return as_rows(exact.as_float([list(r) for r in self.A]), self.n)

    @cached_property
    def _bf(self) -> np.ndarray:
        return np.array([float(v) for v in self.b])

    @cached_property
    def _rownorm(self) -> np.ndarray:
        return np.linalg.norm(self._Af, axis=1)

    @property
    def witness(self) -> np.ndarray:
        return np.array([float(v) for v in self._witness])

    @property
    def witness_exact(self) -> tuple:
        return self._witness

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.A]

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        if self.m == 0:
            return -np.ones(X.shape[0])
        nx = np.linalg.norm(X, axis=1)[:, None]
        scale = self._rownorm[None, :] * (1 + nx) + np.abs(self._bf)[None, :]
        return np.max((X @ self._Af.T - self._bf[None, :]) / scale, axis=1)

    def contains(self, x) -> Membership:
        self._check_dim(x)
        rx = _rational(x)
        if rx is None:
            return super().contains(x)
        slack = [exact.dot(r, rx) - bi for r, bi in zip(self.A, self.b)]
        if any(s > 0 for s in slack):
            return Membership.OUTSIDE
        if any(s == 0 for s in slack):
            return Membership.BOUNDARY
        return Membership.INTERIOR

    def _hit_and_run(self, rng: np.random.Generator, m: int, steps: int = 30) -> np.ndarray:
        x0 = np.asarray(self.witness, dtype=float)
        reach = 3.0 * (1.0 + np.linalg.norm(x0))
        if self.m == 0:
            return x0 + reach / 3.0 * rng.standard_normal((m, self.n))
        A, b = self._Af, self._bf
        X = np.tile(x0, (m, 1))
        slack = np.tile(b - A @ x0, (m, 1))
        for _ in range(steps):
            U = rng.standard_normal((m, self.n))
            U /= np.linalg.norm(U, axis=1)[:, None]
            AU = U @ A.T
            with np.errstate(divide="ignore", invalid="ignore"):
                r = slack / AU
            hi = np.minimum(reach, np.min(np.where(AU > 0, r, np.inf), axis=1))
            lo = np.minimum(reach, np.min(np.where(AU < 0, -r, np.inf), axis=1))
            s = 0.98 * (-lo + rng.uniform(size=m) * (hi + lo))
            new = slack - s[:, None] * AU
            ok = np.all(new > 0, axis=1)
            X[ok] += s[ok, None] * U[ok]
            slack[ok] = new[ok]
        return X

    def exits(self, X, U):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        U = np.asarray(U, dtype=float).reshape(-1, self.n)
        if self.m == 0:
            return np.full(X.shape[0], np.inf)
        AU = U @ self._Af.T
        slack = self._bf[None, :] - X @ self._Af.T
        tol = 1e-15 * self._rownorm[None, :] * np.linalg.norm(U, axis=1)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(AU > tol, slack / AU, np.inf)
        return np.min(r, axis=1)

    def _exit(self, x, u):
        rx, ru = _rational(x), _rational(u)
        if rx is not None and ru is not None:
            best = INF
            for r, bi in zip(self.A, self.b):
                au = exact.dot(r, ru)
                if au > 0:
                    t = (bi - exact.dot(r, rx)) / au
                    best = t if best == INF or t < best else best
            return best
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.m == 0:
            return INF
        au = self._Af @ u
        slack = self._bf - self._Af @ x
        mask = au > 1e-15 * self._rownorm * np.linalg.norm(u)
        if not np.any(mask):
            return INF
        return float(np.min(slack[mask] / au[mask]))

    def active_rows(self, b) -> list[int]:
        rb = _rational(b)
        if rb is not None:
            return [i for i, (r, bi) in enumerate(zip(self.A, self.b)) if exact.dot(r, rb) == bi]
        b = np.asarray(b, dtype=float)
        scale = self._rownorm * (1 + np.linalg.norm(b)) + np.abs(self._bf)
        return [i for i in range(self.m) if abs(self._Af[i] @ b - self._bf[i]) <= 10 * EPS * scale[i]]

    @cached_property
    def _lineality_exact(self) -> list[list[Fraction]]:
        return exact.nullspace(self.rows(), self.n) if self.m else exact.identity(self.n)

    def lineality(self) -> np.ndarray:
        return as_rows(exact.as_float(self._lineality_exact), self.n)

    def lineality_exact(self) -> list[list[Fraction]]:
        return self._lineality_exact

    @cached_property
    def _cone(self) -> cones.PolyCone:
        return cones.PolyCone(self.A, self.n)

    def asymptotic_cone(self) -> cones.PolyCone:
        return self._cone

    def bounded_directions(self) -> np.ndarray:
        return complement(self._cone.span_basis(), self.n)

    def normals_at(self, b) -> np.ndarray:
        self._require_boundary(b)
        return self._Af[self.active_rows(b)]

    def face_of(self, b) -> FaceDescriptor:
        self._require_boundary(b)
        I = self.active_rows(b)
        AI = [list(self.A[i]) for i in I]
        AJ = [list(self.A[j]) for j in range(self.m) if j not in I]
        dirs = exact.nullspace(AI, self.n)
        bounded = polyhedral.cone_is_zero(AJ, AI, self.n)
        return FaceDescriptor(
            np.asarray(b), np.asarray(b), as_rows(exact.as_float(dirs), self.n), bounded
        )

    def face_rows(self, b) -> list[int]:
        return self.active_rows(b)

    @property
    def strictly_convex_mod_lineality(self) -> bool:
        return self.n - len(self._lineality_exact) <= 1

    @cached_property
    def _vertices(self) -> list[tuple]:
        if self._lineality_exact and self.m:
            return []
        return polyhedral.vertices(self.rows(), list(self.b), self.n)

    def vertices(self) -> list[tuple]:
        return self._vertices

    @cached_property
    def _quotient_vertices(self) -> list[tuple]:
        """Vertices of the section by the orthogonal complement of the lineality space."""
        L = self._lineality_exact
        if not L:
            return self.vertices()
        W = exact.nullspace(L, self.n)  # basis of L-perp
        if not W:
            return [tuple([Fraction(0)] * self.n)]
        Wt = exact.transpose(W)  # n x d
        AW = exact.matmul(self.rows(), Wt) if self.m else []
        ys = polyhedral.vertices(AW, list(self.b), len(W))
        return [tuple(exact.matvec(Wt, y)) for y in ys]

    def quotient_vertices(self) -> list[tuple]:
        return self._quotient_vertices

    def bounded_face_info(self) -> BoundedFaceInfo:
        if self._lineality_exact:
            return BoundedFaceInfo(False, False, False)
        v = self.vertices()
        whole = polyhedral.cone_is_zero(self.rows(), [], self.n)
        return BoundedFaceInfo(len(v) >= 1, len(v) >= 2, whole)

    def cone_apex(self) -> np.ndarray | None:
        v = self._quotient_vertices
        if len(v) != 1:
            return None
        return _obj(v[0])

    def irredundant(self) -> HPoly:
        keep = polyhedral.irredundant_rows(self.rows(), list(self.b))
        return HPoly(tuple(self.A[i] for i in keep), tuple(self.b[i] for i in keep), self.n, self._witness)

    def as_hpoly(self) -> HPoly:
        return self

    def to_json(self) -> dict:
        out = {"type": "hpoly", "A": _fmt_matrix(self.A), "b": [_fmt_number(v) for v in self.b]}
        if self.m == 0:
            out["n"] = self.n
        return out


def halfspace(n: int) -> HPoly:
    """{x_n > 0} in R^n."""
    return HPoly(((0,) * (n - 1) + (-1,),), (0,), n)


def space(n: int) -> HPoly:
    return HPoly((), (), n)


def simplex_cone(n: int) -> HPoly:
    """The open positive orthant."""
    return HPoly(tuple(tuple(-int(i == j) for j in range(n)) for i in range(n)), (0,) * n, n)


def point_domain() -> HPoly:
    """The zero-dimensional domain R^0 (a single point)."""
    return HPoly((), (), 0)


# ---------------------------------------------------------------------------
# quadrics


@dataclass(frozen=True, eq=False)
class Paraboloid(ConvexDomain):
    """{x : x_n > x_1^2 + ... + x_{n-1}^2}; n = 1 gives the half-line."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("paraboloid needs n >= 1")

    @property
    def witness(self) -> np.ndarray:
        e = np.zeros(self.n)
        e[-1] = 1.0
        return e

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        q = np.sum(X[:, :-1] ** 2, axis=1)
        return (q - X[:, -1]) / (1 + q + np.abs(X[:, -1]))

    def contains(self, x) -> Membership:
        self._check_dim(x)
        rx = _rational(x)
        if rx is None:
            return super().contains(x)
        s = sum((v * v for v in rx[:-1]), Fraction(0)) - rx[-1]
        return Membership.INTERIOR if s < 0 else Membership.BOUNDARY if s == 0 else Membership.OUTSIDE

    def _exit(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        a = float(u[:-1] @ u[:-1])
        b = float(2 * x[:-1] @ u[:-1] - u[-1])
        c = float(x[:-1] @ x[:-1] - x[-1])
        return _quadratic_exit(a, b, c)

    def exits(self, X, U):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        U = np.asarray(U, dtype=float).reshape(-1, self.n)
        a = np.sum(U[:, :-1] ** 2, axis=1)
        b = 2 * np.sum(X[:, :-1] * U[:, :-1], axis=1) - U[:, -1]
        c = np.sum(X[:, :-1] ** 2, axis=1) - X[:, -1]
        return _quadratic_exits(a, b, c)

    def asymptotic_cone(self):
        e = [0] * self.n
        e[-1] = 1
        return cones.RayCone((tuple(e),), self.n)

    def lineality(self):
        return np.zeros((0, self.n))

    def bounded_directions(self):
        return np.zeros((0, self.n))

    def normals_at(self, b):
        self._require_boundary(b)
        b = np.asarray(b, dtype=float)
        return np.append(2 * b[:-1], -1.0).reshape(1, -1)

    def face_of(self, b):
        self._require_boundary(b)
        return FaceDescriptor(np.asarray(b), np.asarray(b), np.zeros((0, self.n)), True)

    @property
    def strictly_convex_mod_lineality(self) -> bool:
        return True

    def bounded_face_info(self):
        return BoundedFaceInfo(True, False, False)

    def cone_apex(self):
        return np.zeros(1) if self.n == 1 else None

    def as_hpoly(self):
        return halfspace(1) if self.n == 1 else None

    def sample_interior(self, rng, m):
        X = rng.standard_normal((m, self.n))
        X[:, -1] = np.sum(X[:, :-1] ** 2, axis=1) + rng.exponential(size=m) + 1e-3
        return X

    def to_json(self):
        return {"type": "paraboloid", "n": self.n}


@dataclass(frozen=True, eq=False)
class Ball(ConvexDomain):
    """The open unit ball {|x| < 1}."""

    n: int

    @property
    def witness(self):
        return np.zeros(self.n)

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        q = np.sum(X**2, axis=1)
        return (q - 1) / (1 + q)

    def contains(self, x) -> Membership:
        self._check_dim(x)
        rx = _rational(x)
        if rx is None:
            return super().contains(x)
        s = sum((v * v for v in rx), Fraction(0)) - 1
        return Membership.INTERIOR if s < 0 else Membership.BOUNDARY if s == 0 else Membership.OUTSIDE

    def _exit(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return _quadratic_exit(float(u @ u), float(2 * x @ u), float(x @ x - 1))

    def exits(self, X, U):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        U = np.asarray(U, dtype=float).reshape(-1, self.n)
        return _quadratic_exits(np.sum(U * U, axis=1), 2 * np.sum(X * U, axis=1), np.sum(X * X, axis=1) - 1)

    def asymptotic_cone(self):
        return cones.zero_cone(self.n)

    def lineality(self):
        return np.zeros((0, self.n))

    def bounded_directions(self):
        return np.eye(self.n)

    def normals_at(self, b):
        self._require_boundary(b)
        return np.asarray(b, dtype=float).reshape(1, -1)

    def face_of(self, b):
        self._require_boundary(b)
        return FaceDescriptor(np.asarray(b), np.asarray(b), np.zeros((0, self.n)), True)

    @property
    def strictly_convex_mod_lineality(self):
        return True

    def bounded_face_info(self):
        return BoundedFaceInfo(True, False, True)

    def cone_apex(self):
        return None

    def as_hpoly(self):
        return HPoly(((1,), (-1,)), (1, 1), 1) if self.n == 1 else None

    def sample_interior(self, rng, m):
        X = rng.standard_normal((m, self.n))
        X /= np.linalg.norm(X, axis=1)[:, None]
        r = rng.uniform(0, 1, size=m) ** (1.0 / self.n) * 0.999
        return X * r[:, None]

    def to_json(self):
        return {"type": "ball", "n": self.n}


@dataclass(frozen=True, eq=False)
class LorentzCone(ConvexDomain):
    """{x : x_1 > |(x_2, ..., x_n)|}, one nappe of the elliptic cone."""

    n: int

    @property
    def witness(self):
        e = np.zeros(self.n)
        e[0] = 1.0
        return e

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        r = np.linalg.norm(X[:, 1:], axis=1)
        return (r - X[:, 0]) / (1 + r + np.abs(X[:, 0]))

    def _exit(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        a = float(u[0] ** 2 - u[1:] @ u[1:])
        b = float(2 * (x[0] * u[0] - x[1:] @ u[1:]))
        c = float(x[0] ** 2 - x[1:] @ x[1:])
        if self.n == 1:
            return -x[0] / u[0] if u[0] < 0 else INF
        return _first_positive_root(a, b, c)

    def exits(self, X, U):
        if self.n == 1:
            return super().exits(X, U)
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        U = np.asarray(U, dtype=float).reshape(-1, self.n)
        a = U[:, 0] ** 2 - np.sum(U[:, 1:] ** 2, axis=1)
        b = 2 * (X[:, 0] * U[:, 0] - np.sum(X[:, 1:] * U[:, 1:], axis=1))
        c = X[:, 0] ** 2 - np.sum(X[:, 1:] ** 2, axis=1)
        return _quadratic_exits(-a, -b, -c)

    def asymptotic_cone(self):
        return cones.RoundCone(self.n)

    def lineality(self):
        return np.zeros((0, self.n))

    def bounded_directions(self):
        return np.zeros((0, self.n))

    def _is_apex(self, b) -> bool:
        return float(np.linalg.norm(np.asarray(b, dtype=float))) <= 1e-9

    def normals_at(self, b):
        self._require_boundary(b)
        b = np.asarray(b, dtype=float)
        if self._is_apex(b):
            gens = [np.eye(self.n)[0] * -1.0]
            for j in range(1, self.n):
                for s in (1.0, -1.0):
                    v = -np.eye(self.n)[0]
                    v[j] = s
                    gens.append(v / np.sqrt(2))
            return np.array(gens)
        r = b[1:] / np.linalg.norm(b[1:])
        return np.append(-1.0, r).reshape(1, -1) / np.sqrt(2)

    def face_of(self, b):
        self._require_boundary(b)
        b = np.asarray(b, dtype=float)
        if self._is_apex(b):
            return FaceDescriptor(b, np.zeros(self.n), np.zeros((0, self.n)), True)
        return FaceDescriptor(b, b, (b / np.linalg.norm(b)).reshape(1, -1), False)

    @property
    def strictly_convex_mod_lineality(self):
        return self.n == 1

    def bounded_face_info(self):
        return BoundedFaceInfo(True, False, False)

    def cone_apex(self):
        return np.zeros(self.n)

    def as_hpoly(self):
        if self.n == 1:
            return halfspace(1)
        if self.n == 2:
            return HPoly(((-1, 1), (-1, -1)), (0, 0), 2)
        return None

    def sample_interior(self, rng, m):
        W = rng.standard_normal((m, self.n - 1))
        first = np.linalg.norm(W, axis=1) + rng.exponential(size=m) + 1e-3
        return np.hstack([first[:, None], W])

    def to_json(self):
        return {"type": "lorentz_cone", "n": self.n}


@dataclass(frozen=True, eq=False)
class HyperbolaRegion(ConvexDomain):
    """{(x, y) : x > 0, x y > 1}, convex but with no apex for its asymptotic cone."""

    n: int = 2

    @property
    def witness(self):
        return np.array([2.0, 2.0])

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, 2)
        p = X[:, 0] * X[:, 1]
        return np.maximum(-X[:, 0] / (1 + np.abs(X[:, 0])), (1 - p) / (1 + np.abs(p)))

    def _exit(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return _first_positive_root(float(u[0] * u[1]), float(x[0] * u[1] + x[1] * u[0]), float(x[0] * x[1] - 1))

    def asymptotic_cone(self):
        return cones.RayCone(((1, 0), (0, 1)), 2)

    def lineality(self):
        return np.zeros((0, 2))

    def bounded_directions(self):
        return np.zeros((0, 2))

    def normals_at(self, b):
        self._require_boundary(b)
        b = np.asarray(b, dtype=float)
        return np.array([[-b[1], -b[0]]])

    def face_of(self, b):
        self._require_boundary(b)
        return FaceDescriptor(np.asarray(b), np.asarray(b), np.zeros((0, 2)), True)

    @property
    def strictly_convex_mod_lineality(self):
        return True

    def bounded_face_info(self):
        return BoundedFaceInfo(True, False, False)

    def cone_apex(self):
        return None

    def sample_interior(self, rng, m):
        x = np.exp(rng.normal(size=m))
        y = (1 + rng.exponential(size=m) + 1e-3) / x
        return np.column_stack([x, y])

    def to_json(self):
        return {"type": "hyperbola"}


# ---------------------------------------------------------------------------
# composites


def _embed_rows(blocks: list[np.ndarray], dims: list[int]) -> np.ndarray:
    n = sum(dims)
    rows, off = [], 0
    for B, d in zip(blocks, dims):
        for r in B:
            v = np.zeros(n)
            v[off : off + d] = np.asarray(r, dtype=float)
            rows.append(v)
        off += d
    return as_rows(rows, n)


@dataclass(frozen=True, eq=False)
class Product(ConvexDomain):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise DomainError("product needs at least one factor")

    @property
    def n(self) -> int:
        return sum(f.n for f in self.factors)

    @property
    def dims(self) -> list[int]:
        return [f.n for f in self.factors]

    def split(self, x) -> list:
        out, i = [], 0
        x = np.asarray(x) if not isinstance(x, (list, tuple)) else np.array(list(x), dtype=object)
        for f in self.factors:
            out.append(x[i : i + f.n])
            i += f.n
        return out

    @property
    def witness(self):
        return np.concatenate([f.witness for f in self.factors])

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        out = np.full(X.shape[0], -np.inf)
        i = 0
        for f in self.factors:
            out = np.maximum(out, f.values(X[:, i : i + f.n]))
            i += f.n
        return out

    def contains(self, x) -> Membership:
        self._check_dim(x)
        ms = [f.contains(p) for f, p in zip(self.factors, self.split(x))]
        if Membership.OUTSIDE in ms:
            return Membership.OUTSIDE
        if Membership.BOUNDARY in ms:
            return Membership.BOUNDARY
        return Membership.INTERIOR

    def exits(self, X, U):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        U = np.asarray(U, dtype=float).reshape(-1, self.n)
        out = np.full(X.shape[0], np.inf)
        i = 0
        for f in self.factors:
            Xi, Ui = X[:, i : i + f.n], U[:, i : i + f.n]
            moving = np.any(Ui != 0, axis=1)
            if moving.any():
                t = np.full(X.shape[0], np.inf)
                t[moving] = f.exits(Xi[moving], Ui[moving])
                out = np.minimum(out, t)
            i += f.n
        return out

    def _exit(self, x, u):
        best = INF
        for f, p, d in zip(self.factors, self.split(x), self.split(u)):
            if all(v == 0 for v in d):
                continue
            t = f._exit(p, d)
            if t != INF and (best == INF or t < best):
                best = t
        return best

    def asymptotic_cone(self):
        return cones.ProductCone(tuple(f.asymptotic_cone() for f in self.factors))

    def lineality(self):
        return _embed_rows([f.lineality() for f in self.factors], self.dims)

    def bounded_directions(self):
        return _embed_rows([f.bounded_directions() for f in self.factors], self.dims)

    def normals_at(self, b):
        self._require_boundary(b)
        blocks = []
        for f, p in zip(self.factors, self.split(b)):
            blocks.append(f.normals_at(p) if f.contains(p) == Membership.BOUNDARY else np.zeros((0, f.n)))
        return _embed_rows(blocks, self.dims)

    def face_of(self, b):
        self._require_boundary(b)
        points, blocks, bounded = [], [], True
        for f, p in zip(self.factors, self.split(b)):
            if f.contains(p) == Membership.BOUNDARY:
                F = f.face_of(p)
                points.append(np.asarray(F.point, dtype=float))
                blocks.append(F.directions)
                bounded = bounded and F.bounded
            else:
                points.append(np.asarray(p, dtype=float))
                blocks.append(np.eye(f.n))
                bounded = bounded and f.bounded_directions().shape[0] == f.n
        return FaceDescriptor(np.asarray(b), np.concatenate(points), _embed_rows(blocks, self.dims), bounded)

    @property
    def strictly_convex_mod_lineality(self):
        nontrivial = [f for f in self.factors if f.n - f.lineality().shape[0] > 0]
        if len(nontrivial) >= 2:
            return False
        return nontrivial[0].strictly_convex_mod_lineality if nontrivial else True

    def bounded_face_info(self):
        options = []
        for f in self.factors:
            info = f.bounded_face_info()
            opts = []  # (positive_dim, is_boundary_face)
            if info.vertex:
                opts.append((False, True))
            if info.positive:
                opts.append((True, True))
            if info.whole_bounded:
                opts.append((f.n > 0, False))
            options.append(opts)
        vertex = positive = False
        for combo in itertools.product(*options):
            if not any(bd for _, bd in combo):
                continue
            if any(pos for pos, _ in combo):
                positive = True
            else:
                vertex = True
        whole = all(f.bounded_face_info().whole_bounded for f in self.factors)
        return BoundedFaceInfo(vertex, positive, whole)

    def cone_apex(self):
        apexes = [f.cone_apex() for f in self.factors]
        if any(a is None for a in apexes):
            return None
        return np.concatenate([np.asarray(a) for a in apexes])

    def as_hpoly(self):
        parts = [f.as_hpoly() for f in self.factors]
        if any(p is None for p in parts):
            return None
        rows, rhs, off = [], [], 0
        for p in parts:
            for r, bi in zip(p.A, p.b):
                row = [Fraction(0)] * self.n
                row[off : off + p.n] = r
                rows.append(tuple(row))
                rhs.append(bi)
            off += p.n
        hint = tuple(v for p in parts for v in p.witness_exact)
        return HPoly(tuple(rows), tuple(rhs), self.n, hint)

    def sample_interior(self, rng, m):
        return np.hstack([f.sample_interior(rng, m) for f in self.factors])

    def to_json(self):
        return {"type": "product", "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class AffineImage(ConvexDomain):
    """{L y + a : y in base} with L invertible."""

    linear: object
    translation: object
    base: ConvexDomain

    def __post_init__(self):
        n = self.base.n
        L = np.asarray(self.linear, dtype=object).reshape(n, n)
        a = np.asarray(self.translation, dtype=object).reshape(n)
        Lr = [_rational(row) for row in L]
        ar = _rational(a)
        exact_map = all(r is not None for r in Lr) and ar is not None
        if exact_map:
            try:
                Linv = exact.inverse(Lr)
            except ZeroDivisionError:
                raise DomainError("affine map is not invertible") from None
            object.__setattr__(self, "linear", tuple(tuple(r) for r in Lr))
            object.__setattr__(self, "translation", tuple(ar))
            object.__setattr__(self, "_Le", Lr)
            object.__setattr__(self, "_Linv_e", Linv)
            object.__setattr__(self, "_ae", ar)
        else:
            Lf = np.asarray(L, dtype=float)
            if abs(np.linalg.det(Lf)) <= 1e-12 * max(1.0, np.linalg.norm(Lf)) ** n:
                raise DomainError("affine map is not invertible")
            object.__setattr__(self, "linear", tuple(tuple(float(v) for v in r) for r in Lf))
            object.__setattr__(self, "translation", tuple(float(v) for v in np.asarray(a, dtype=float)))
            object.__setattr__(self, "_Le", None)
            object.__setattr__(self, "_Linv_e", None)
            object.__setattr__(self, "_ae", None)
        Lf = np.array(self.linear, dtype=float)
        object.__setattr__(self, "_Lf", Lf)
        object.__setattr__(self, "_af", np.array(self.translation, dtype=float))
        object.__setattr__(self, "_Linv_f", np.linalg.inv(Lf))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def exact_map(self) -> bool:
        return self._Le is not None

    def pull(self, x):
        """Preimage in the base coordinates (exact when possible)."""
        rx = _rational(x)
        if rx is not None and self.exact_map:
            return _obj(exact.matvec(self._Linv_e, [v - w for v, w in zip(rx, self._ae)]))
        return self._Linv_f @ (np.asarray(x, dtype=float) - self._af)

    def pull_direction(self, u):
        ru = _rational(u)
        if ru is not None and self.exact_map:
            return _obj(exact.matvec(self._Linv_e, ru))
        return self._Linv_f @ np.asarray(u, dtype=float)

    def push(self, y):
        ry = _rational(y)
        if ry is not None and self.exact_map:
            return _obj(v + w for v, w in zip(exact.matvec(self._Le, ry), self._ae))
        return self._Lf @ np.asarray(y, dtype=float) + self._af

    @property
    def witness(self):
        return np.asarray(self.push(self.base.witness), dtype=float)

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        return self.base.values((X - self._af) @ self._Linv_f.T)

    def contains(self, x) -> Membership:
        self._check_dim(x)
        return self.base.contains(self.pull(x))

    def exits(self, X, U):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        U = np.asarray(U, dtype=float).reshape(-1, self.n)
        return self.base.exits((X - self._af) @ self._Linv_f.T, U @ self._Linv_f.T)

    def _exit(self, x, u):
        return self.base._exit(self.pull(x), self.pull_direction(u))

    def _hit(self, x, u) -> Hit:
        t = self._exit(x, u)
        if t == INF:
            return Hit(INF, ProjectivePoint.at_infinity(np.asarray(u)))
        rx, ru = _rational(x), _rational(u)
        if rx is not None and ru is not None and isinstance(t, Fraction):
            return Hit(t, _obj(a + t * b for a, b in zip(rx, ru)))
        t = float(t)
        return Hit(t, np.asarray(x, dtype=float) + t * np.asarray(u, dtype=float))

    def asymptotic_cone(self):
        c = self.base.asymptotic_cone()
        if self.exact_map and isinstance(c, cones.PolyCone):
            return cones.PolyCone(exact.matmul([list(r) for r in c.A], self._Linv_e) if c.A else (), self.n)
        if self.exact_map and isinstance(c, cones.RayCone) and c._exact:
            push = lambda rows: tuple(tuple(exact.matvec(self._Le, list(r))) for r in rows)
            return cones.RayCone(push(c.rays), self.n, push(c.lineality))
        return cones.LinearImageCone(self._Lf, c)

    def lineality(self):
        B = self.base.lineality()
        return B @ self._Lf.T if B.shape[0] else np.zeros((0, self.n))

    def bounded_directions(self):
        B = self.base.bounded_directions()
        return B @ self._Linv_f if B.shape[0] else np.zeros((0, self.n))

    def normals_at(self, b):
        self._require_boundary(b)
        N = self.base.normals_at(self.pull(b))
        return N @ self._Linv_f if N.shape[0] else np.zeros((0, self.n))

    def face_of(self, b):
        self._require_boundary(b)
        F = self.base.face_of(self.pull(b))
        dirs = F.directions @ self._Lf.T if F.dim else np.zeros((0, self.n))
        return FaceDescriptor(np.asarray(b), np.asarray(self.push(np.asarray(F.point, dtype=float)), dtype=float), dirs, F.bounded)

    @property
    def strictly_convex_mod_lineality(self):
        return self.base.strictly_convex_mod_lineality

    def bounded_face_info(self):
        return self.base.bounded_face_info()

    def cone_apex(self):
        p = self.base.cone_apex()
        return None if p is None else self.push(p)

    def as_hpoly(self):
        P = self.base.as_hpoly()
        if P is None:
            return None
        if not self.exact_map:
            Lr = [exact.frac_vector(r) for r in self.linear]
            Linv = exact.inverse(Lr)
            a = exact.frac_vector(self.translation)
        else:
            Lr, Linv, a = self._Le, self._Linv_e, self._ae
        if P.m == 0:
            return HPoly((), (), self.n)
        A2 = exact.matmul(P.rows(), Linv)
        b2 = [bi + exact.dot(r, a) for bi, r in zip(P.b, A2)]
        hint = [v + w for v, w in zip(exact.matvec(Lr, list(P.witness_exact)), a)]
        return HPoly(tuple(tuple(r) for r in A2), tuple(b2), self.n, tuple(hint))

    def sample_interior(self, rng, m):
        Y = self.base.sample_interior(rng, m)
        return Y @ self._Lf.T + self._af

    def to_json(self):
        return {
            "type": "affine_image",
            "linear": _fmt_matrix(self.linear),
            "translation": [_fmt_number(v) for v in self.translation],
            "base": self.base.to_json(),
        }


@dataclass(frozen=True, eq=False)
class Homogenized(ConvexDomain):
    """The cone {(x, t) : t > 0, x / t in base} in one dimension higher."""

    base: ConvexDomain

    @property
    def n(self) -> int:
        return self.base.n + 1

    @property
    def witness(self):
        return np.append(self.base.witness, 1.0)

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        x, t = X[:, :-1], X[:, -1]
        scale = 1 + np.linalg.norm(X, axis=1)
        out = -t / scale
        pos = t > 1e-12 * scale
        if np.any(pos):
            out[pos] = np.maximum(out[pos], self.base.values(x[pos] / t[pos, None]))
        flat = ~pos & (t >= -EPS * scale)
        if np.any(flat):
            cone = self.base.asymptotic_cone()
            for i in np.nonzero(flat)[0]:
                viol = cone.violation(x[i]) / scale[i]
                out[i] = max(out[i], viol if viol > EPS else 0.0)
        return out

    def contains(self, x) -> Membership:
        self._check_dim(x)
        rx = _rational(x)
        if rx is not None and rx[-1] > 0:
            y = _obj(v / rx[-1] for v in rx[:-1])
            return self.base.contains(y)
        return super().contains(x)

    def _exit(self, z, w):
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        x, t = z[:-1], z[-1]
        u, s = w[:-1], w[-1]
        y0 = x / t
        d = u - s * y0
        if np.linalg.norm(d) <= 1e-15 * (np.linalg.norm(u) + abs(s) * np.linalg.norm(y0)):
            return -t / s if s < 0 else INF
        lam = float(self.base._exit(y0, d))
        if lam == INF:
            return -t / s if s < 0 else INF
        if s > 0 and lam * s >= 1:
            return INF
        return lam * t / (1 - lam * s)

    def asymptotic_cone(self):
        P = self.as_hpoly()
        if P is not None:
            return P.asymptotic_cone()
        return cones.ClosureCone(self)

    def lineality(self):
        B = self.base.lineality()
        return np.hstack([B, np.zeros((B.shape[0], 1))])

    def bounded_directions(self):
        return np.zeros((0, self.n))

    def _split_boundary(self, b):
        b = np.asarray(b, dtype=float)
        t = b[-1]
        if t <= 1e-12 * (1 + np.linalg.norm(b)):
            return None
        return b[:-1] / t

    def normals_at(self, b):
        self._require_boundary(b)
        y = self._split_boundary(b)
        if y is None:
            raise DomainError("normal cones on the slice t = 0 are not computed")
        N = self.base.normals_at(y)
        return np.hstack([N, -(N @ y)[:, None]])

    def face_of(self, b):
        self._require_boundary(b)
        bf = np.asarray(b, dtype=float)
        if np.linalg.norm(bf) <= 1e-12 and self.base.lineality().shape[0] == 0:
            return FaceDescriptor(np.asarray(b), np.zeros(self.n), np.zeros((0, self.n)), True)
        y = self._split_boundary(b)
        if y is None:
            U = self.base.asymptotic_cone().face_span(bf[:-1])
            dirs = np.hstack([U, np.zeros((U.shape[0], 1))])
            return FaceDescriptor(np.asarray(b), np.zeros(self.n), dirs, False)
        F = self.base.face_of(y)
        rows = [np.append(np.asarray(F.point, dtype=float), 1.0)]
        rows += [np.append(d, 0.0) for d in F.directions]
        return FaceDescriptor(np.asarray(b), np.zeros(self.n), orthonormal_basis(rows, self.n), False)

    def cone_face_span(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.contains(u) == Membership.INTERIOR:
            return np.eye(self.n)
        return self.face_of(u).directions

    @property
    def strictly_convex_mod_lineality(self):
        return self.base.n - self.base.lineality().shape[0] == 0

    def bounded_face_info(self):
        return BoundedFaceInfo(self.base.lineality().shape[0] == 0, False, False)

    def cone_apex(self):
        return np.zeros(self.n)

    def as_hpoly(self):
        P = self.base.as_hpoly()
        if P is None:
            return None
        rows = [tuple(r) + (-bi,) for r, bi in zip(P.A, P.b)]
        rows.append(tuple([Fraction(0)] * P.n + [Fraction(-1)]))
        return HPoly(tuple(rows), tuple([Fraction(0)] * len(rows)), self.n)

    def sample_interior(self, rng, m):
        Y = self.base.sample_interior(rng, m)
        t = rng.exponential(size=m) + 0.05
        return np.hstack([Y * t[:, None], t[:, None]])

    def to_json(self):
        return {"type": "homogenized", "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class ProjectiveImage(ConvexDomain):
    """T applied to a base domain whose image stays inside the affine chart.

    Only chords that stay in the chart are supported; structural queries
    (cone, faces) require the base to be bounded.
    """

    matrix: np.ndarray
    base: ConvexDomain

    def __post_init__(self):
        T = np.asarray(self.matrix, dtype=float)
        if T.shape != (self.base.n + 1, self.base.n + 1):
            raise DomainError("projective image: matrix size does not match the base dimension")
        if abs(np.linalg.det(T)) <= 1e-14 * np.linalg.norm(T) ** T.shape[0]:
            raise DomainError("projective map is singular")
        object.__setattr__(self, "matrix", T)
        object.__setattr__(self, "_Tinv", np.linalg.inv(T))
        w = T @ np.append(self.base.witness, 1.0)
        if abs(w[-1]) <= 1e-12 * np.linalg.norm(w):
            raise DomainError("image of the witness point lies at infinity")

    @property
    def n(self) -> int:
        return self.base.n

    def _base_bounded(self) -> bool:
        return self.base.bounded_directions().shape[0] == self.base.n

    def pull(self, y) -> np.ndarray | None:
        Z = self._Tinv @ np.append(np.asarray(y, dtype=float), 1.0)
        if abs(Z[-1]) <= 1e-14 * np.linalg.norm(Z):
            return None
        return Z[:-1] / Z[-1]

    def push(self, x) -> np.ndarray:
        Y = self.matrix @ np.append(np.asarray(x, dtype=float), 1.0)
        return Y[:-1] / Y[-1]

    @property
    def witness(self):
        return self.push(self.base.witness)

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        Z = np.hstack([X, np.ones((X.shape[0], 1))]) @ self._Tinv.T
        w = Z[:, -1]
        ok = np.abs(w) > 1e-14 * np.linalg.norm(Z, axis=1)
        out = np.ones(X.shape[0])
        if np.any(ok):
            out[ok] = self.base.values(Z[ok, :-1] / w[ok, None])
        return out

    def _exit(self, y, u):
        Z0 = self._Tinv @ np.append(np.asarray(y, dtype=float), 1.0)
        Z1 = self._Tinv @ np.append(np.asarray(u, dtype=float), 0.0)
        if Z0[-1] < 0:
            Z0, Z1 = -Z0, -Z1
        w0, w1 = Z0[-1], Z1[-1]
        y0 = Z0[:-1] / w0
        d = Z1[:-1] - w1 * y0
        lam = float(self.base._exit(y0, d)) if np.linalg.norm(d) > 0 else INF
        if lam == INF or (w1 < 0 and lam * w1 <= -1) or (w1 > 0 and lam * w1 >= 1):
            if w1 > 0 and (lam == INF or lam * w1 >= 1):
                raise DomainError("chord reaches the hyperplane sent to infinity")
            if w1 < 0 and lam == INF:
                raise DomainError("chord passes through infinity of the base")
        return lam * w0 / (1 - lam * w1)

    def asymptotic_cone(self):
        if not self._base_bounded():
            raise DomainError("asymptotic cone of a projective image needs a bounded base")
        return cones.zero_cone(self.n)

    def lineality(self):
        return np.zeros((0, self.n))

    def bounded_directions(self):
        if not self._base_bounded():
            raise DomainError("projective image of an unbounded base is not supported here")
        return np.eye(self.n)

    def normals_at(self, b):
        self._require_boundary(b)
        x = self.pull(b)
        N = self.base.normals_at(x)
        out = []
        ref = np.append(self.witness, 1.0)
        for nu in N:
            h = np.append(nu, -nu @ x) @ self._Tinv  # hyperplane through b in image coords
            v = h[:-1]
            # orient outward: interior witness must satisfy h . (y, 1) < 0
            if h @ ref > 0:
                v = -v
            out.append(v)
        return as_rows(out, self.n)

    def face_of(self, b):
        self._require_boundary(b)
        F = self.base.face_of(self.pull(b))
        p = self.push(F.point)
        dirs = []
        for d in F.directions:
            # image of the line p + s d near s = 0
            h = 1e-6
            dirs.append((self.push(np.asarray(F.point, dtype=float) + h * d) - self.push(np.asarray(F.point, dtype=float) - h * d)) / (2 * h))
        return FaceDescriptor(np.asarray(b), p, orthonormal_basis(dirs, self.n) if dirs else np.zeros((0, self.n)), F.bounded and self._base_bounded())

    @property
    def strictly_convex_mod_lineality(self):
        return self.base.strictly_convex_mod_lineality

    def bounded_face_info(self):
        return self.base.bounded_face_info()

    def cone_apex(self):
        return None

    def to_json(self):
        return {"type": "projective_image", "matrix": self.matrix.tolist(), "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class ConvexSum(ConvexDomain):
    """Union of open segments joining two placed domains with disjoint supports.

    Factor i lives in R^{d_i} and is placed by y -> M_i y + c_i. With
    d_1 + d_2 + 1 = n the joint coordinates (alpha y_1, alpha, beta y_2,
    beta) are determined by x through one square linear system.
    """

    first: ConvexDomain
    first_linear: object
    first_offset: object
    second: ConvexDomain
    second_linear: object
    second_offset: object

    def __post_init__(self):
        d1, d2 = self.first.n, self.second.n
        c1 = np.asarray(self.first_offset, dtype=float).ravel()
        c2 = np.asarray(self.second_offset, dtype=float).ravel()
        n = c1.size
        M1 = np.asarray(self.first_linear, dtype=float).reshape(n, d1)
        M2 = np.asarray(self.second_linear, dtype=float).reshape(n, d2)
        if c2.size != n:
            raise DomainError("convex sum: placements live in different dimensions")
        if d1 + d2 + 1 != n:
            raise DomainError(f"convex sum of dimensions {d1} and {d2} is not full-dimensional in R^{n}")
        S = np.zeros((n + 1, n + 1))
        S[:n, :d1] = M1
        S[:n, d1] = c1
        S[:n, d1 + 1 : d1 + 1 + d2] = M2
        S[:n, -1] = c2
        S[n, d1] = 1.0
        S[n, -1] = 1.0
        sv = np.linalg.svd(S, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise DomainError("supports not disjoint")
        for name, val in (("first_linear", M1), ("first_offset", c1), ("second_linear", M2), ("second_offset", c2)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "_Sinv", np.linalg.inv(S))

    @property
    def n(self) -> int:
        return self.first_offset.size

    def decompose(self, x):
        """(alpha, y1, beta, y2) with x = alpha (M1 y1 + c1) + beta (M2 y2 + c2)."""
        d1 = self.first.n
        sol = self._Sinv @ np.append(np.asarray(x, dtype=float), 1.0)
        z1, alpha, z2, beta = sol[:d1], sol[d1], sol[d1 + 1 : -1], sol[-1]
        return alpha, z1, beta, z2

    def _part_value(self, D, weight, z, scale):
        if weight > 1e-12:
            return D.value(z / weight) if D.n else -1.0
        # weight ~ 0: the part must vanish for bounded factors
        return 0.0 if np.linalg.norm(z) <= 1e-9 * scale else 1.0

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            a, z1, b, z2 = self.decompose(x)
            scale = 1.0 + np.linalg.norm(x)
            g = max(-a, -b)
            if a < -EPS or b < -EPS:
                out[i] = max(g, 2 * EPS)
                continue
            g = max(g, self._part_value(self.first, a, z1, scale), self._part_value(self.second, b, z2, scale))
            out[i] = g
        return out

    @property
    def witness(self):
        p1 = self.first_linear @ self.first.witness + self.first_offset if self.first.n else self.first_offset
        p2 = self.second_linear @ self.second.witness + self.second_offset if self.second.n else self.second_offset
        return 0.5 * (p1 + p2)

    def _exit(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        hi = 1.0
        while self.contains(x + hi * u) == Membership.INTERIOR:
            hi *= 2
            if hi > 1e12:
                return INF
        lo = 0.0
        while hi - lo > 1e-13 * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if self.contains(x + mid * u) == Membership.INTERIOR:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def asymptotic_cone(self):
        return cones.zero_cone(self.n)

    def lineality(self):
        return np.zeros((0, self.n))

    def bounded_directions(self):
        return np.eye(self.n)

    def normals_at(self, b):
        raise DomainError("normal cones of convex sums are not computed")

    def face_of(self, b):
        raise DomainError("faces of convex sums are not computed")

    @property
    def strictly_convex_mod_lineality(self):
        return self.n == 1

    def bounded_face_info(self):
        return BoundedFaceInfo(True, self.n >= 2, True)

    def cone_apex(self):
        return None

    def to_json(self):
        return {
            "type": "convex_sum",
            "parts": [
                {"domain": self.first.to_json(), "linear": self.first_linear.tolist(), "offset": self.first_offset.tolist()},
                {"domain": self.second.to_json(), "linear": self.second_linear.tolist(), "offset": self.second_offset.tolist()},
            ],
        }


# ---------------------------------------------------------------------------
# JSON


def _num(v):
    return exact.to_fraction(v)


def domain_from_json(spec: dict) -> ConvexDomain:
    """Build a domain from its JSON description; raises DomainError on bad input."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise DomainError("domain spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "hpoly":
            A = [[_num(v) for v in row] for row in spec["A"]]
            b = [_num(v) for v in spec["b"]]
            return HPoly(tuple(map(tuple, A)), tuple(b), int(spec.get("n", -1)))
        if kind == "paraboloid":
            return Paraboloid(int(spec["n"]))
        if kind == "ball":
            return Ball(int(spec["n"]))
        if kind == "halfspace":
            return halfspace(int(spec["n"]))
        if kind == "space":
            return space(int(spec["n"]))
        if kind == "simplex_cone":
            return simplex_cone(int(spec["n"]))
        if kind == "lorentz_cone":
            return LorentzCone(int(spec["n"]))
        if kind == "hyperbola":
            return HyperbolaRegion()
        if kind == "product":
            return Product(tuple(domain_from_json(f) for f in spec["factors"]))
        if kind == "affine_image":
            base = domain_from_json(spec["base"])
            L = [[_num(v) for v in row] for row in spec["linear"]]
            a = [_num(v) for v in spec.get("translation", [0] * base.n)]
            return AffineImage(tuple(map(tuple, L)), tuple(a), base)
        if kind == "homogenized":
            return Homogenized(domain_from_json(spec["base"]))
        if kind == "projective_image":
            return ProjectiveImage(np.array([[float(_num(v)) for v in row] for row in spec["matrix"]]), domain_from_json(spec["base"]))
        if kind == "convex_sum":
            p1, p2 = spec["parts"]
            mat = lambda rows: np.array([[float(_num(v)) for v in r] for r in rows], dtype=float)
            vec = lambda vs: np.array([float(_num(v)) for v in vs])
            return ConvexSum(
                domain_from_json(p1["domain"]), mat(p1["linear"]), vec(p1["offset"]),
                domain_from_json(p2["domain"]), mat(p2["linear"]), vec(p2["offset"]),
            )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
        if isinstance(err, DomainError):
            raise
        raise DomainError(f"bad '{kind}' domain: {err}") from None
    raise DomainError(f"unknown domain type {kind!r}")
