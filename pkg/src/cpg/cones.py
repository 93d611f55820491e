"""Closed convex cones with apex at the origin.

Every cone answers the same questions: membership, a distance-like
violation for points outside, linear span, lineality space, extreme rays
modulo lineality, the span of the face through a given element, and random
sampling. Polyhedral cones are exact; round (Lorentz) cones are analytic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.optimize import nnls

from cpg import exact, lp, polyhedral
from cpg.linalg import as_rows, complement, orthonormal_basis, span_dim

TOL = 1e-9


def _exact_rows(rows) -> list[list[Fraction]] | None:
    rows = list(rows)
    try:
        if all(exact.is_rational_vector(r) for r in rows):
            return [exact.frac_vector(r) for r in rows]
    except TypeError:
        pass
    return None


def _is_rational_point(u) -> bool:
    return isinstance(u, (list, tuple, np.ndarray)) and exact.is_rational_vector(np.asarray(u, dtype=object))


class Cone:
    """Interface shared by all cone representations."""

    n: int
    polyhedral = False

    def contains(self, u, tol: float = TOL) -> bool:
        raise NotImplementedError

    def violation(self, u) -> float:
        """Zero inside; for outside points a lower bound on (or equal to) the distance."""
        raise NotImplementedError

    def span_basis(self) -> np.ndarray:
        raise NotImplementedError

    def lineality_basis(self) -> np.ndarray:
        raise NotImplementedError

    def extreme_rays(self, rng: np.random.Generator | None = None, count: int = 16) -> tuple[np.ndarray, bool]:
        """(rays, continuous). Continuous cones return `count` sampled extreme rays."""
        raise NotImplementedError

    def face_span(self, u) -> np.ndarray:
        """Basis of the linear span of the smallest face containing u."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def relint_element(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return self.span_basis().shape[0]

    @property
    def pointed(self) -> bool:
        return self.lineality_basis().shape[0] == 0

    def is_zero(self) -> bool:
        return self.dim == 0

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class PolyCone(Cone):
    """{u : A u <= 0, E u = 0}, exact over the rationals."""

    A: tuple
    n: int
    E: tuple = ()
    polyhedral = True

    def __post_init__(self):
        A = exact.frac_matrix(self.A)
        E = exact.frac_matrix(self.E)
        object.__setattr__(self, "A", tuple(tuple(r) for r in A))
        object.__setattr__(self, "E", tuple(tuple(r) for r in E))

    @cached_property
    def _Af(self) -> np.ndarray:
        return as_rows(exact.as_float(self.A), self.n)

    @cached_property
    def _Ef(self) -> np.ndarray:
        return as_rows(exact.as_float(self.E), self.n)

    @cached_property
    def _rays_exact(self):
        return polyhedral.extreme_rays([list(r) for r in self.A], self.n, [list(r) for r in self.E])

    @cached_property
    def _implicit(self) -> list[int]:
        A = [list(r) for r in self.A]
        zeros = [Fraction(0)] * len(A)
        E = [list(r) for r in self.E]
        return polyhedral.implicit_equalities(A, zeros, E, [Fraction(0)] * len(E)) if A else []

    @cached_property
    def _span_exact(self) -> list[list[Fraction]]:
        rows = [list(self.A[i]) for i in self._implicit] + [list(r) for r in self.E]
        return exact.nullspace(rows, self.n) if rows else exact.identity(self.n)

    def contains(self, u, tol: float = TOL) -> bool:
        if _is_rational_point(u):
            v = exact.frac_vector(u)
            return all(exact.dot(r, v) <= 0 for r in self.A) and all(exact.dot(r, v) == 0 for r in self.E)
        return self.violation(u) <= tol * max(1.0, float(np.linalg.norm(np.asarray(u, dtype=float))))

    def violation(self, u) -> float:
        u = np.asarray(u, dtype=float)
        gens = self.generators()
        if gens.shape[0] == 0:
            return float(np.linalg.norm(u))
        _, resid = nnls(gens.T, u)
        return float(resid)

    def generators(self) -> np.ndarray:
        rays, lin = self._rays_exact
        L = as_rows(exact.as_float(lin), self.n)
        R = as_rows(exact.as_float(rays), self.n)
        return np.vstack([R, L, -L])

    def span_basis(self) -> np.ndarray:
        return as_rows(exact.as_float(self._span_exact), self.n)

    def span_basis_exact(self) -> list[list[Fraction]]:
        return self._span_exact

    def lineality_basis(self) -> np.ndarray:
        return as_rows(exact.as_float(self._rays_exact[1]), self.n)

    def lineality_basis_exact(self) -> list[list[Fraction]]:
        return self._rays_exact[1]

    def rays_exact(self) -> list[tuple[Fraction, ...]]:
        return self._rays_exact[0]

    def extreme_rays(self, rng=None, count: int = 16):
        return as_rows(exact.as_float(self._rays_exact[0]), self.n), False

    def face_span(self, u) -> np.ndarray:
        if _is_rational_point(u):
            v = exact.frac_vector(u)
            active = [list(r) for r in self.A if exact.dot(r, v) == 0]
        else:
            v = np.asarray(u, dtype=float)
            scale = max(1.0, float(np.linalg.norm(v)))
            active = [list(r) for r, rf in zip(self.A, self._Af) if abs(rf @ v) <= 1e-9 * scale * np.linalg.norm(rf)]
        rows = active + [list(r) for r in self.E]
        null = exact.nullspace(rows, self.n) if rows else exact.identity(self.n)
        # intersect with the cone's span (implicit equalities are always active)
        return as_rows(exact.as_float(null), self.n)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        rays, lin = self.extreme_rays()[0], self.lineality_basis()
        u = np.zeros(self.n)
        for r in rays:
            u += rng.exponential() * r / np.linalg.norm(r)
        for v in lin:
            u += rng.standard_normal() * v / np.linalg.norm(v)
        return u

    def relint_element(self) -> np.ndarray:
        rays = self.extreme_rays()[0]
        return np.sum([r / np.linalg.norm(r) for r in rays], axis=0) if len(rays) else np.zeros(self.n)

    def to_json(self) -> dict:
        out = {"type": "polycone", "A": [[str(v) for v in r] for r in self.A], "n": self.n}
        if self.E:
            out["E"] = [[str(v) for v in r] for r in self.E]
        return out


@dataclass(frozen=True, eq=False)
class RayCone(Cone):
    """Nonnegative combinations of `rays` plus the linear span of `lineality`."""

    rays: tuple
    n: int
    lineality: tuple = ()
    polyhedral = True

    def __post_init__(self):
        ex_r, ex_l = _exact_rows(self.rays), _exact_rows(self.lineality)
        object.__setattr__(self, "_exact", ex_r is not None and ex_l is not None)
        if self._exact:
            object.__setattr__(self, "rays", tuple(tuple(r) for r in ex_r))
            object.__setattr__(self, "lineality", tuple(tuple(r) for r in ex_l))
        else:
            object.__setattr__(self, "rays", tuple(tuple(float(v) for v in r) for r in self.rays))
            object.__setattr__(self, "lineality", tuple(tuple(float(v) for v in r) for r in self.lineality))

    @cached_property
    def _R(self) -> np.ndarray:
        return as_rows(np.array(self.rays, dtype=float), self.n)

    @cached_property
    def _L(self) -> np.ndarray:
        return orthonormal_basis(np.array(self.lineality, dtype=float), self.n)

    def _gens(self) -> np.ndarray:
        return np.vstack([self._R, self._L, -self._L])

    def contains(self, u, tol: float = TOL) -> bool:
        if self._exact and _is_rational_point(u):
            return self._lp_contains(exact.frac_vector(u))
        return self.violation(u) <= tol * max(1.0, float(np.linalg.norm(np.asarray(u, dtype=float))))

    def _lp_contains(self, v) -> bool:
        k, l = len(self.rays), len(self.lineality)
        if k + l == 0:
            return all(x == 0 for x in v)
        cols = [list(r) for r in self.rays] + [list(r) for r in self.lineality]
        A_eq = exact.transpose(cols)
        bounds = [[Fraction(-int(i == j)) for j in range(k + l)] for i in range(k)]
        res = lp.maximize([0] * (k + l), bounds or None, [0] * k or None, A_eq, v)
        return res.optimal

    def violation(self, u) -> float:
        u = np.asarray(u, dtype=float)
        G = self._gens()
        if G.shape[0] == 0:
            return float(np.linalg.norm(u))
        _, resid = nnls(G.T, u)
        return float(resid)

    def span_basis(self) -> np.ndarray:
        return orthonormal_basis(np.vstack([self._R, self._L]), self.n)

    def lineality_basis(self) -> np.ndarray:
        return orthonormal_basis(np.vstack([self._L, self._hidden_lineality()]), self.n)

    def _hidden_lineality(self) -> np.ndarray:
        # rays r with -r also in the cone
        out = [r for r in self._R if self.violation(-r) <= 1e-9 * np.linalg.norm(r)]
        return as_rows(out, self.n)

    def extreme_rays(self, rng=None, count: int = 16):
        L = self.lineality_basis()
        C = complement(L, self.n)
        keep = []
        for i, r in enumerate(self._R):
            rr = C.T @ (C @ r)
            if np.linalg.norm(rr) <= 1e-12:
                continue
            others = [C.T @ (C @ s) for j, s in enumerate(self._R) if j != i]
            G = np.vstack([as_rows(others, self.n), L, -L]) if (others or L.shape[0]) else np.zeros((0, self.n))
            if G.shape[0]:
                _, resid = nnls(G.T, rr)
                if resid <= 1e-9 * np.linalg.norm(rr):
                    continue
            if not any(np.linalg.norm(rr / np.linalg.norm(rr) - k / np.linalg.norm(k)) < 1e-9 for k in keep):
                keep.append(rr)
        return as_rows(keep, self.n), False

    def face_span(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        G = self._R
        k = G.shape[0]
        L = self._L
        if k == 0:
            return L.copy()
        # r_j belongs to the minimal face iff some representation of u uses it
        # with a positive weight; test by NNLS with r_j weight pinned to a bit.
        members = []
        base = np.vstack([G, L, -L])
        for j in range(k):
            eps = 1e-3 * max(1.0, np.linalg.norm(u)) / max(np.linalg.norm(G[j]), 1e-300)
            _, resid = nnls(base.T, u - eps * G[j])
            if resid <= 1e-9 * max(1.0, np.linalg.norm(u)):
                members.append(G[j])
        return orthonormal_basis(np.vstack([as_rows(members, self.n), L]), self.n)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        u = np.zeros(self.n)
        for r in self._R:
            u += rng.exponential() * r / np.linalg.norm(r)
        for v in self._L:
            u += rng.standard_normal() * v
        return u

    def relint_element(self) -> np.ndarray:
        if self._R.shape[0] == 0:
            return np.zeros(self.n)
        return np.sum([r / np.linalg.norm(r) for r in self._R], axis=0)

    def to_json(self) -> dict:
        fmt = (lambda v: str(v)) if self._exact else float
        return {
            "type": "raycone",
            "n": self.n,
            "rays": [[fmt(v) for v in r] for r in self.rays],
            "lineality": [[fmt(v) for v in r] for r in self.lineality],
        }


def zero_cone(n: int) -> RayCone:
    return RayCone((), n)


@dataclass(frozen=True, eq=False)
class RoundCone(Cone):
    """The Lorentz cone {u : u_1 >= |(u_2, ..., u_n)|}."""

    n: int

    def contains(self, u, tol: float = TOL) -> bool:
        u = np.asarray(u, dtype=float)
        return self.violation(u) <= tol * max(1.0, float(np.linalg.norm(u)))

    def violation(self, u) -> float:
        u = np.asarray(u, dtype=float)
        a, r = u[0], float(np.linalg.norm(u[1:]))
        if r <= a:
            return 0.0
        if r <= -a:
            return float(np.linalg.norm(u))
        return (r - a) / np.sqrt(2.0)

    def span_basis(self) -> np.ndarray:
        return np.eye(self.n)

    def lineality_basis(self) -> np.ndarray:
        return np.zeros((0, self.n))

    def extreme_rays(self, rng=None, count: int = 16):
        if self.n == 1:
            return np.ones((1, 1)), False
        if self.n == 2:
            return np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2), False
        rng = rng if rng is not None else np.random.default_rng(0)
        W = rng.standard_normal((count, self.n - 1))
        W /= np.linalg.norm(W, axis=1)[:, None]
        return np.hstack([np.ones((count, 1)), W]) / np.sqrt(2), True

    def face_span(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        nu = np.linalg.norm(u)
        if nu <= 1e-12:
            return np.zeros((0, self.n))
        if u[0] - np.linalg.norm(u[1:]) > 1e-9 * nu:
            return np.eye(self.n)
        return (u / nu).reshape(1, -1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        w = rng.standard_normal(self.n - 1)
        return np.concatenate([[np.linalg.norm(w) + rng.exponential()], w])

    def relint_element(self) -> np.ndarray:
        e = np.zeros(self.n)
        e[0] = 1.0
        return e

    def to_json(self) -> dict:
        return {"type": "roundcone", "n": self.n}


@dataclass(frozen=True, eq=False)
class ProductCone(Cone):
    factors: tuple

    @property
    def n(self) -> int:
        return sum(f.n for f in self.factors)

    @property
    def polyhedral(self) -> bool:
        return all(f.polyhedral for f in self.factors)

    def _split(self, u):
        out, i = [], 0
        for f in self.factors:
            out.append(u[i : i + f.n])
            i += f.n
        return out

    def _embed(self, blocks: list[np.ndarray]) -> np.ndarray:
        rows, offset = [], 0
        for f, B in zip(self.factors, blocks):
            for r in B:
                v = np.zeros(self.n)
                v[offset : offset + f.n] = r
                rows.append(v)
            offset += f.n
        return as_rows(rows, self.n)

    def contains(self, u, tol: float = TOL) -> bool:
        return all(f.contains(p, tol) for f, p in zip(self.factors, self._split(u)))

    def violation(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(sum(f.violation(p) ** 2 for f, p in zip(self.factors, self._split(u)))))

    def span_basis(self) -> np.ndarray:
        return self._embed([f.span_basis() for f in self.factors])

    def lineality_basis(self) -> np.ndarray:
        return self._embed([f.lineality_basis() for f in self.factors])

    def extreme_rays(self, rng=None, count: int = 16):
        blocks, cont = [], False
        for f in self.factors:
            R, c = f.extreme_rays(rng, count)
            blocks.append(R)
            cont = cont or c
        return self._embed(blocks), cont

    def face_span(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self._embed([f.face_span(p) for f, p in zip(self.factors, self._split(u))])

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.concatenate([f.sample(rng) for f in self.factors]) if self.factors else np.zeros(0)

    def relint_element(self) -> np.ndarray:
        return np.concatenate([f.relint_element() for f in self.factors])

    def to_json(self) -> dict:
        return {"type": "productcone", "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class LinearImageCone(Cone):
    """L applied to a base cone, L invertible."""

    L: np.ndarray
    base: Cone

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "_Linv", np.linalg.inv(L))
        object.__setattr__(self, "_smin", float(np.linalg.svd(L, compute_uv=False)[-1]))

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def polyhedral(self) -> bool:
        return self.base.polyhedral

    def _pull(self, u) -> np.ndarray:
        return self._Linv @ np.asarray(u, dtype=float)

    def _push_rows(self, B: np.ndarray) -> np.ndarray:
        return as_rows(B @ self.L.T, self.n) if B.shape[0] else np.zeros((0, self.n))

    def contains(self, u, tol: float = TOL) -> bool:
        v = self._pull(u)
        return self.base.contains(v, tol * max(1.0, np.linalg.norm(u)) / max(1.0, np.linalg.norm(v)) / max(self._smin, 1e-300))

    def violation(self, u) -> float:
        return self.base.violation(self._pull(u)) * self._smin

    def span_basis(self) -> np.ndarray:
        return orthonormal_basis(self._push_rows(self.base.span_basis()), self.n)

    def lineality_basis(self) -> np.ndarray:
        return orthonormal_basis(self._push_rows(self.base.lineality_basis()), self.n)

    def extreme_rays(self, rng=None, count: int = 16):
        R, c = self.base.extreme_rays(rng, count)
        return self._push_rows(R), c

    def face_span(self, u) -> np.ndarray:
        return orthonormal_basis(self._push_rows(self.base.face_span(self._pull(u))), self.n)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.L @ self.base.sample(rng)

    def relint_element(self) -> np.ndarray:
        return self.L @ self.base.relint_element()

    def to_json(self) -> dict:
        return {"type": "linearimagecone", "L": self.L.tolist(), "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class ClosureCone(Cone):
    """The closure of a domain that is itself a cone, queried through the domain."""

    domain: object
    lineality: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return self.domain.n

    def contains(self, u, tol: float = TOL) -> bool:
        return self.domain.closure_contains(np.asarray(u, dtype=float))

    def violation(self, u) -> float:
        u = np.asarray(u, dtype=float)
        if self.domain.closure_contains(u):
            return 0.0
        return self.domain.outside_distance(u)

    def span_basis(self) -> np.ndarray:
        return np.eye(self.n)

    def lineality_basis(self) -> np.ndarray:
        return self.domain.lineality()

    def extreme_rays(self, rng=None, count: int = 16):
        rng = rng if rng is not None else np.random.default_rng(0)
        pts = self.domain.sample_boundary(rng, count)
        rays = [p / np.linalg.norm(p) for p in pts if np.linalg.norm(p) > 1e-12 and self.domain.face_of(p).dim <= 1]
        return as_rows(rays, self.n), True

    def face_span(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.linalg.norm(u) <= 1e-12:
            return self.lineality_basis()
        return self.domain.cone_face_span(u)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.domain.sample_interior(rng, 1)[0]

    def relint_element(self) -> np.ndarray:
        return np.asarray(self.domain.witness, dtype=float)

    def to_json(self) -> dict:
        return {"type": "closurecone", "domain": self.domain.to_json()}


def cone_span_dim(cone: Cone) -> int:
    return span_dim(cone.span_basis(), cone.n)
