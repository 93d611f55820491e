"""Small float linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np

RTOL = 1e-10


def as_rows(vectors, n: int) -> np.ndarray:
    """Stack vectors into a float (k, n) array; an empty input gives shape (0, n)."""
    arr = np.asarray(vectors, dtype=float)
    if arr.size == 0:
        return np.zeros((0, n))
    return arr.reshape(-1, n)


def orthonormal_basis(vectors, n: int, rtol: float = RTOL) -> np.ndarray:
    """Rows forming an orthonormal basis of the span of `vectors`."""
    M = as_rows(vectors, n)
    if M.shape[0] == 0:
        return M
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((0, n))
    r = int(np.sum(s > rtol * s[0]))
    return vt[:r]


def complement(vectors, n: int, rtol: float = RTOL) -> np.ndarray:
    """Rows forming an orthonormal basis of the orthogonal complement of the span."""
    M = as_rows(vectors, n)
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vt[r:]


def span_dim(vectors, n: int, rtol: float = RTOL) -> int:
    return orthonormal_basis(vectors, n, rtol).shape[0]


def in_span(v, basis: np.ndarray, tol: float = 1e-8) -> bool:
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0:
        return True
    if basis.shape[0] == 0:
        return False
    Q = orthonormal_basis(basis, v.size)
    return np.linalg.norm(v - Q.T @ (Q @ v)) <= tol * nv


def span_contains(outer: np.ndarray, inner: np.ndarray, tol: float = 1e-8) -> bool:
    return all(in_span(v, outer, tol) for v in inner)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(n)
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            return v / nv


def distinct_directions(vectors, tol: float = 1e-9) -> list[np.ndarray]:
    """Unit vectors from `vectors`, dropping zeros and positive multiples of earlier ones."""
    out: list[np.ndarray] = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        w = v / nv
        if not any(np.linalg.norm(w - o) <= tol for o in out):
            out.append(w)
    return out
