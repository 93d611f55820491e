"""Hilbert distance on properly convex domains and the word-ball orbit distance."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from cpg.domains import INF, ConvexDomain, DomainError, Membership
from cpg.geometry import classify_convexity
from cpg.projective import ProjectiveMap

PRECISION_FLOOR = 1e-10


class HilbertError(ValueError):
    pass


class PrecisionWarning(UserWarning):
    pass


def chord_distance(D: ConvexDomain, p, q) -> float:
    """d_H(p, q) without validating the inputs.

    With u the unit vector from p to q, delta = |q - p|, a the distance from
    p back to the boundary and b the distance from q on to the boundary, the
    cross ratio of (p - a u, q + b u, p, q) is (1 + delta/b)(1 + delta/a).
    An endpoint at infinity contributes a factor 1, which is what the same
    cross ratio gives in any projective chart where the chord is bounded.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    delta = float(np.linalg.norm(d))
    if delta == 0.0:
        return 0.0
    u = d / delta
    a = float(D._exit(p, -u))
    b = float(D._exit(q, u))
    if min(a, b) < PRECISION_FLOOR * max(1.0, delta):
        warnings.warn("chord endpoint within 1e-10 of a point; distance is ill-conditioned", PrecisionWarning, stacklevel=3)
    out = 0.0
    if b != INF:
        out += np.log1p(delta / b)
    if a != INF:
        out += np.log1p(delta / a)
    return float(out)


def require_properly_convex(D: ConvexDomain) -> None:
    if not classify_convexity(D).properly_convex:
        raise HilbertError("Hilbert metric undefined: domain is not properly convex")


def hilbert_distance(D: ConvexDomain, p, q) -> float:
    require_properly_convex(D)
    for name, x in (("p", p), ("q", q)):
        if D.contains(x) != Membership.INTERIOR:
            raise DomainError(f"{name} is not an interior point")
    return chord_distance(D, p, q)


def _as_matrix(g, n: int) -> np.ndarray:
    M = g.matrix if isinstance(g, ProjectiveMap) else g
    M = np.asarray(M, dtype=float)
    if M.shape != (n + 1, n + 1):
        raise DomainError(f"generator must be a {(n + 1)}x{(n + 1)} matrix")
    return M


def act(M: np.ndarray, x) -> np.ndarray:
    y = M @ np.append(np.asarray(x, dtype=float), 1.0)
    return y[:-1] / y[-1]


def check_preserves(D: ConvexDomain, M: np.ndarray, samples: int = 100, seed: int = 0) -> np.ndarray | None:
    """First sampled interior point whose image is not interior, or None."""
    rng = np.random.default_rng(seed)
    for x in D.sample_interior(rng, samples):
        y = M @ np.append(x, 1.0)
        if abs(y[-1]) <= 1e-14 * np.linalg.norm(y) or D.contains(y[:-1] / y[-1]) != Membership.INTERIOR:
            return x
    return None


@dataclass
class OrbitMetricQuery:
    generators: list
    radius: int
    p: np.ndarray
    q: np.ndarray
    names: list[str] | None = None

    def generator_names(self) -> list[str]:
        return list(self.names) if self.names else [f"g{i + 1}" for i in range(len(self.generators))]


@dataclass
class OrbitDistance:
    distance: float
    word: str
    words_examined: int
    radius: int
    letters: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"distance": self.distance, "word": self.word, "words_examined": self.words_examined, "radius": self.radius}


def orbit_distance(query: OrbitMetricQuery, D: ConvexDomain, seed: int = 0) -> OrbitDistance:
    """Upper bound min_w d_H(w p, q) over reduced words of length at most `radius`.

    Words are read right to left as maps: "a b" sends p to a(b(p)). Words
    are enumerated breadth first, generators before inverses, so the
    reported word is the shortlex-first minimizer.
    """
    require_properly_convex(D)
    if query.radius < 0:
        raise DomainError("radius must be nonnegative")
    names = query.generator_names()
    mats = [_as_matrix(g, D.n) for g in query.generators]
    for name, M in zip(names, mats):
        bad = check_preserves(D, M, 100, seed)
        if bad is not None:
            raise DomainError(f"generator {name} does not preserve the domain (sample point {bad.tolist()})")
    letters = [(nm, M) for nm, M in zip(names, mats)] + [(nm + "^-1", np.linalg.inv(M)) for nm, M in zip(names, mats)]
    m = len(mats)
    inverse_of = {i: (i + m) % (2 * m) for i in range(2 * m)} if m else {}
    p = np.asarray(query.p, dtype=float)
    q = np.asarray(query.q, dtype=float)
    for name, x in (("p", p), ("q", q)):
        if D.contains(x) != Membership.INTERIOR:
            raise DomainError(f"{name} is not an interior point")
    best = chord_distance(D, p, q)
    best_word: list[int] = []
    examined = 1
    frontier = [([], np.eye(D.n + 1))]
    for _ in range(query.radius):
        nxt = []
        for word, M in frontier:
            for i, (_, G) in enumerate(letters):
                if word and inverse_of[word[-1]] == i:
                    continue
                W = M @ G  # the new letter acts first
                wp = act(W, p)
                examined += 1
                d = chord_distance(D, wp, q)
                w = word + [i]
                if d < best - 1e-15:
                    best, best_word = d, w
                nxt.append((w, W))
        frontier = nxt
    text = " ".join(letters[i][0] for i in best_word) if best_word else "e"
    return OrbitDistance(best, text, examined, query.radius, best_word)
