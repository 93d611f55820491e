"""Homogeneous coordinates: projective points, maps, subspaces and cross-ratios.

A point of RP^n is stored as a nonzero vector of length n+1; the affine
chart R^n is the set with last coordinate nonzero and the hyperplane at
infinity is the set with last coordinate 0. Maps are (n+1)x(n+1) matrices
up to scale and may be singular, in which case they carry their kernel and
range.

Coordinates are either float arrays or object arrays of Fractions. In the
rational case rank, kernel and range are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from cpg import exact

RANK_RTOL = 1e-10
COLLINEAR_RTOL = 1e-9


class ProjectiveError(ValueError):
    pass


def _is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def _coerce(coords) -> np.ndarray:
    arr = np.asarray(coords)
    if arr.dtype == object or arr.dtype.kind in "iu":
        if all(exact.is_rational_scalar(v) for v in arr.ravel()):
            return np.array([Fraction(v) for v in arr.ravel()], dtype=object).reshape(arr.shape)
        return arr.astype(float)
    return arr.astype(float)


def _coerce_matrix(matrix) -> np.ndarray:
    arr = _coerce(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ProjectiveError(f"expected a square matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    coords: np.ndarray

    def __post_init__(self):
        arr = _coerce(self.coords)
        if arr.ndim != 1 or arr.size == 0:
            raise ProjectiveError("projective point needs a nonempty coordinate vector")
        if all(v == 0 for v in arr):
            raise ProjectiveError("zero vector is not a projective point")
        object.__setattr__(self, "coords", arr)

    @classmethod
    def from_affine(cls, x) -> ProjectivePoint:
        arr = _coerce(np.atleast_1d(x))
        one = Fraction(1) if _is_exact(arr) else 1.0
        return cls(np.append(arr, np.array([one], dtype=arr.dtype)))

    @classmethod
    def at_infinity(cls, direction) -> ProjectivePoint:
        arr = _coerce(np.atleast_1d(direction))
        zero = Fraction(0) if _is_exact(arr) else 0.0
        return cls(np.append(arr, np.array([zero], dtype=arr.dtype)))

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    @property
    def exact(self) -> bool:
        return _is_exact(self.coords)

    def is_at_infinity(self, tol: float = 1e-12) -> bool:
        last = self.coords[-1]
        if self.exact:
            return last == 0
        return abs(last) <= tol * np.max(np.abs(self.coords))

    def affine(self) -> np.ndarray:
        if self.is_at_infinity():
            raise ProjectiveError("point at infinity has no affine coordinates")
        return self.coords[:-1] / self.coords[-1]

    def normalized(self) -> ProjectivePoint:
        """Representative whose largest-magnitude entry (first on ties) is +1."""
        mags = [abs(v) for v in self.coords]
        i = max(range(len(mags)), key=lambda j: (mags[j], -j))
        return ProjectivePoint(self.coords / self.coords[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjectivePoint) or other.dim != self.dim:
            return NotImplemented
        if self.exact and other.exact:
            return exact.rank([list(self.coords), list(other.coords)]) == 1
        M = np.vstack([self.coords.astype(float), other.coords.astype(float)])
        s = np.linalg.svd(M, compute_uv=False)
        return s[1] <= COLLINEAR_RTOL * s[0]

    def __hash__(self):
        return hash(self.dim)

    def __repr__(self) -> str:
        return f"ProjectivePoint([{':'.join(str(v) for v in self.coords)}])"


@dataclass(frozen=True, eq=False)
class ProjectiveSubspace:
    """Projectivization of the span of `basis` (rows). Empty when basis is empty."""

    basis: np.ndarray
    ambient: int  # n, so vectors have length n+1

    def __post_init__(self):
        arr = np.asarray(self.basis)
        if arr.size == 0:
            arr = np.zeros((0, self.ambient + 1))
        object.__setattr__(self, "basis", arr)

    @classmethod
    def empty(cls, n: int) -> ProjectiveSubspace:
        return cls(np.zeros((0, n + 1)), n)

    @property
    def dim(self) -> int:
        return self.basis.shape[0] - 1

    @property
    def exact(self) -> bool:
        return _is_exact(self.basis)

    def is_empty(self) -> bool:
        return self.dim < 0

    def contains(self, p: ProjectivePoint | np.ndarray) -> bool:
        v = p.coords if isinstance(p, ProjectivePoint) else _coerce(p)
        if self.is_empty():
            return False
        if self.exact and _is_exact(v):
            return exact.rank([list(r) for r in self.basis] + [list(v)]) == self.dim + 1
        B = self.basis.astype(float)
        v = v.astype(float)
        coef, *_ = np.linalg.lstsq(B.T, v, rcond=None)
        return np.linalg.norm(B.T @ coef - v) <= COLLINEAR_RTOL * max(np.linalg.norm(v), 1e-300)

    def contains_subspace(self, other: ProjectiveSubspace) -> bool:
        return all(self.contains(row) for row in other.basis)

    def at_infinity(self) -> bool:
        """True when the whole subspace lies in the hyperplane at infinity."""
        if self.is_empty():
            return True
        last = self.basis[:, -1]
        if self.exact:
            return all(v == 0 for v in last)
        return bool(np.all(np.abs(last.astype(float)) <= 1e-12 * np.max(np.abs(self.basis.astype(float)))))

    def affine_part(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(point, direction rows) of the intersection with R^n, or None if it lies at infinity."""
        if self.at_infinity():
            return None
        B = self.basis.astype(float)
        i = int(np.argmax(np.abs(B[:, -1])))
        p = B[i, :-1] / B[i, -1]
        dirs = []
        for j in range(B.shape[0]):
            if j == i:
                continue
            w = B[j] - (B[j, -1] / B[i, -1]) * B[i]
            dirs.append(w[:-1])
        D = np.array(dirs).reshape(len(dirs), B.shape[1] - 1)
        return p, D

    def infinity_part(self) -> np.ndarray:
        """Direction rows spanning the intersection with the hyperplane at infinity."""
        B = self.basis.astype(float)
        if B.shape[0] == 0:
            return np.zeros((0, self.ambient))
        # vectors in span(B) with zero last coordinate
        coef_null = _float_null(B[:, -1:].T)
        V = coef_null.T @ B if coef_null.size else np.zeros((0, B.shape[1]))
        return V[:, :-1]

    def __repr__(self) -> str:
        return f"ProjectiveSubspace(dim={self.dim}, basis={self.basis.tolist()})"


def _float_null(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Columns spanning the null space of M (float SVD)."""
    M = np.atleast_2d(M)
    n = M.shape[1]
    if M.size == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M)
    tol = rtol * (s[0] if s.size else 0.0)
    r = int(np.sum(s > tol)) if s.size and s[0] > 0 else 0
    return vt[r:].T


def float_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


@dataclass(frozen=True, eq=False)
class ProjectiveMap:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _coerce_matrix(self.matrix))

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def exact(self) -> bool:
        return _is_exact(self.matrix)

    @cached_property
    def _decomposition(self):
        M = self.matrix
        size = M.shape[0]
        if self.exact:
            rows = [list(r) for r in M]
            r = exact.rank(rows)
            ker = exact.nullspace(rows, size)
            cols = exact.transpose(rows)
            rng = [cols[i] for i in exact.independent_rows(cols)]
            as_obj = lambda vs: np.array(vs, dtype=object).reshape(len(vs), size)
            return r, as_obj(ker), as_obj(rng)
        u, s, vt = np.linalg.svd(M.astype(float))
        r = 0 if s[0] == 0 else int(np.sum(s > RANK_RTOL * s[0]))
        return r, vt[r:], u[:, :r].T

    @property
    def rank(self) -> int:
        return self._decomposition[0]

    @property
    def kernel_basis(self) -> np.ndarray:
        return self._decomposition[1]

    @property
    def range_basis(self) -> np.ndarray:
        return self._decomposition[2]

    def is_singular(self) -> bool:
        return self.rank <= self.n

    def normalized(self) -> ProjectiveMap:
        return ProjectiveMap(normalize_matrix(self.matrix.astype(float)))

    def __matmul__(self, other: ProjectiveMap) -> ProjectiveMap:
        return ProjectiveMap(self.matrix @ other.matrix)

    def inverse(self) -> ProjectiveMap:
        if self.exact:
            return ProjectiveMap(np.array(exact.inverse([list(r) for r in self.matrix]), dtype=object))
        if self.is_singular():
            raise ProjectiveError("singular map has no inverse")
        return ProjectiveMap(np.linalg.inv(self.matrix.astype(float)))

    def __call__(self, p: ProjectivePoint) -> ProjectivePoint:
        return apply_map(self, p)

    def is_affine(self, tol: float = 1e-12) -> bool:
        last = self.matrix[-1]
        if self.exact:
            return all(v == 0 for v in last[:-1]) and last[-1] != 0
        scale = np.max(np.abs(self.matrix.astype(float)))
        return bool(np.all(np.abs(last[:-1].astype(float)) <= tol * scale) and abs(float(last[-1])) > tol * scale)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjectiveMap) or other.n != self.n:
            return NotImplemented
        a, b = self.matrix.ravel(), other.matrix.ravel()
        if self.exact and other.exact:
            return exact.rank([list(a), list(b)]) == 1
        M = np.vstack([a.astype(float), b.astype(float)])
        s = np.linalg.svd(M, compute_uv=False)
        return s[1] <= 1e-9 * s[0]

    def __hash__(self):
        return hash(self.n)

    def __repr__(self) -> str:
        return f"ProjectiveMap(rank={self.rank}, matrix={self.matrix.tolist()})"


def normalize_matrix(M: np.ndarray, sign_rtol: float = 1e-8) -> np.ndarray:
    """Unit Frobenius norm; the first entry above ``sign_rtol * max|entry|`` is made positive.

    The relative threshold keeps the sign choice stable when leading
    entries decay to zero along a sequence.
    """
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M)
    if norm == 0:
        raise ProjectiveError("rank zero")
    N = M / norm
    flat = N.ravel()
    big = np.max(np.abs(flat))
    lead = next(v for v in flat if abs(v) > sign_rtol * big)
    return N if lead > 0 else -N


def _as_point(p) -> ProjectivePoint:
    if isinstance(p, ProjectivePoint):
        return p
    return ProjectivePoint.from_affine(p)


def _line_coordinates(s1: ProjectivePoint, s2: ProjectivePoint, q: ProjectivePoint):
    """Coefficients (a, b) with q ~ a s1 + b s2; raises if q is off the line."""
    if s1.exact and s2.exact and q.exact:
        A = [[a, b] for a, b in zip(s1.coords, s2.coords)]
        sol = exact.solve(A, list(q.coords))
        if sol is None:
            raise ProjectiveError("not collinear")
        return sol
    B = np.column_stack([s1.coords.astype(float), s2.coords.astype(float)])
    v = q.coords.astype(float)
    coef, *_ = np.linalg.lstsq(B, v, rcond=None)
    if np.linalg.norm(B @ coef - v) > COLLINEAR_RTOL * np.linalg.norm(v):
        raise ProjectiveError("not collinear")
    return coef


def cross_ratio(s1, s2, p1, p2):
    """CR(s1, s2, p1, p2) = |s2-p1| |s1-p2| / (|s2-p2| |s1-p1|).

    Evaluated with 2x2 determinants in homogeneous line coordinates, so any
    of the points may lie at infinity. Affine inputs (plain vectors or
    scalars) are embedded with last coordinate 1. A vanishing numerator
    gives 0 and a vanishing denominator gives +inf.
    """
    s1, s2, p1, p2 = (_as_point(np.atleast_1d(p)) if not isinstance(p, ProjectivePoint) else p for p in (s1, s2, p1, p2))
    if len({s1.dim, s2.dim, p1.dim, p2.dim}) != 1:
        raise ProjectiveError("points live in different dimensions")
    if s1 == s2:
        raise ProjectiveError("degenerate chord")
    a1, b1 = _line_coordinates(s1, s2, p1)
    a2, b2 = _line_coordinates(s1, s2, p2)
    num = abs(a1 * b2)
    den = abs(a2 * b1)
    if den == 0:
        return float("inf") if num != 0 else float("nan")
    return num / den


def apply_map(T: ProjectiveMap, p) -> ProjectivePoint:
    p = _as_point(p)
    if p.dim != T.n:
        raise ProjectiveError(f"dimension mismatch: map on RP^{T.n}, point in RP^{p.dim}")
    y = T.matrix.dot(p.coords)
    if T.exact and p.exact:
        if all(v == 0 for v in y):
            raise ProjectiveError("point in kernel")
        return ProjectivePoint(y)
    y = np.asarray(y, dtype=float)
    scale = np.linalg.norm(T.matrix.astype(float), 2) * np.linalg.norm(p.coords.astype(float))
    if np.linalg.norm(y) <= RANK_RTOL * scale:
        raise ProjectiveError("point in kernel")
    return ProjectivePoint(y)


def kernel_and_range(T: ProjectiveMap) -> tuple[ProjectiveSubspace, ProjectiveSubspace]:
    if T.rank == 0:
        raise ProjectiveError("rank zero")
    if not T.is_singular():
        return ProjectiveSubspace.empty(T.n), ProjectiveSubspace.empty(T.n)
    return ProjectiveSubspace(T.kernel_basis, T.n), ProjectiveSubspace(T.range_basis, T.n)


def affine_embed(A, a=None) -> ProjectiveMap:
    """The block matrix [[A, a], [0, 1]] acting on homogeneous coordinates."""
    A = _coerce(np.atleast_2d(A))
    n = A.shape[0]
    a = _coerce(np.zeros(n, dtype=int) if a is None else np.atleast_1d(a))
    if A.shape != (n, n) or a.shape != (n,):
        raise ProjectiveError("affine_embed needs an n x n matrix and an n-vector")
    if _is_exact(A) != _is_exact(a):
        A, a = A.astype(float), a.astype(float)
    dtype = object if _is_exact(A) else float
    zero, one = (Fraction(0), Fraction(1)) if dtype is object else (0.0, 1.0)
    M = np.empty((n + 1, n + 1), dtype=dtype)
    M[:n, :n] = A
    M[:n, n] = a
    M[n, :n] = zero
    M[n, n] = one
    return ProjectiveMap(M)


def embed_point(x) -> ProjectivePoint:
    return ProjectivePoint.from_affine(x)


@dataclass(frozen=True)
class SequenceLimit:
    map: ProjectiveMap
    converged: bool
    steps: int
    last_change: float
    changes: tuple[float, ...] = field(repr=False, default=())

    @property
    def kernel(self) -> ProjectiveSubspace:
        return kernel_and_range(self.map)[0]

    @property
    def range(self) -> ProjectiveSubspace:
        return kernel_and_range(self.map)[1]


def _iterate(seq, steps: int) -> Iterable:
    if callable(seq):
        return (seq(k) for k in range(1, steps + 1))
    return itertools.islice(iter(seq), steps)


def limit_of_sequence(
    seq: Iterable | Callable[[int], object], steps: int, tol: float = 1e-9, tail: int = 3
) -> SequenceLimit:
    """Normalize ``steps`` maps of a sequence and test the tail for convergence.

    `seq` is an iterable of maps (or matrices) or a callable ``k -> map``
    evaluated at k = 1..steps. The sequence is declared converged when the
    last `tail` successive normalized differences are all below `tol`; the
    returned map is then the rank-truncated final iterate with entries
    below `tol` set to zero.
    """
    prev = None
    changes: list[float] = []
    count = 0
    for item in _iterate(seq, steps):
        M = item.matrix if isinstance(item, ProjectiveMap) else np.asarray(item)
        N = normalize_matrix(np.asarray(M, dtype=float))
        if prev is not None:
            changes.append(float(np.linalg.norm(N - prev)))
        prev = N
        count += 1
    if prev is None or count < steps:
        raise ProjectiveError(f"sequence yielded {count} maps, {steps} required")
    window = changes[-tail:] if changes else [0.0]
    converged = all(c < tol for c in window)
    last = changes[-1] if changes else 0.0
    if converged:
        u, s, vt = np.linalg.svd(prev)
        r = int(np.sum(s > RANK_RTOL * s[0]))
        prev = normalize_matrix((u[:, :r] * s[:r]) @ vt[:r])
        # entries below the tolerance are not resolved by the tail; treat them as zero
        prev = normalize_matrix(np.where(np.abs(prev) < tol, 0.0, prev))
    return SequenceLimit(ProjectiveMap(prev), converged, count, last, tuple(changes))
