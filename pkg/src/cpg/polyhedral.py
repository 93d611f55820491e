"""Exact combinatorics of polyhedra {x : A x <= b} over the rationals.

Sizes here are tiny (a handful of constraints in dimension at most five),
so vertices and extreme rays are found by enumerating active sets rather
than by a double-description method.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from cpg import exact, lp

Rows = list  # list[list[Fraction]]


def interior_point(A: Rows, b: Sequence[Fraction], n: int) -> list[Fraction] | None:
    """A point with A x < b componentwise, or None when the interior is empty."""
    if not A:
        return [Fraction(0)] * n
    # maximize s subject to A x + s <= b, s <= 1
    A_ub = [list(row) + [Fraction(1)] for row in A] + [[Fraction(0)] * n + [Fraction(1)]]
    b_ub = list(b) + [Fraction(1)]
    res = lp.maximize([0] * n + [1], A_ub, b_ub)
    if not res.optimal or res.value <= 0:
        return None
    return list(res.x[:n])


def implicit_equalities(A: Rows, b: Sequence[Fraction], A_eq: Rows = (), b_eq: Sequence = ()) -> list[int]:
    """Rows of A x <= b that hold with equality on the whole (nonempty) polyhedron."""
    out = []
    for i, row in enumerate(A):
        res = lp.maximize([-a for a in row], A, b, list(A_eq) or None, list(b_eq) or None)
        if res.status == lp.INFEASIBLE:
            raise ValueError("empty polyhedron")
        if res.optimal and b[i] + res.value == 0:
            out.append(i)
    return out


def relative_interior_point(
    A: Rows, b: Sequence[Fraction], n: int, A_eq: Rows = (), b_eq: Sequence = ()
) -> list[Fraction] | None:
    """A point in the relative interior of {A x <= b, A_eq x = b_eq}, or None if empty."""
    A_eq, b_eq = list(A_eq), list(b_eq)
    if lp.feasible_point(A or None, list(b) or None, A_eq or None, b_eq or None, n) is None:
        return None
    if not A:
        return list(lp.feasible_point(None, None, A_eq or None, b_eq or None, n)) if A_eq else [Fraction(0)] * n
    eq = set(implicit_equalities(A, b, A_eq, b_eq))
    strict = [i for i in range(len(A)) if i not in eq]
    E = A_eq + [A[i] for i in eq]
    e = b_eq + [b[i] for i in eq]
    if not strict:
        return list(lp.feasible_point(None, None, E, e, n))
    A_ub = [list(A[i]) + [Fraction(1)] for i in strict] + [[Fraction(0)] * n + [Fraction(1)]]
    b_ub = [b[i] for i in strict] + [Fraction(1)]
    E_ext = [list(row) + [Fraction(0)] for row in E]
    res = lp.maximize([0] * n + [1], A_ub, b_ub, E_ext or None, e or None)
    return list(res.x[:n])


def vertices(A: Rows, b: Sequence[Fraction], n: int) -> list[tuple[Fraction, ...]]:
    """All vertices of {A x <= b}; empty when the polyhedron has lineality."""
    if n == 0:
        return [()] if all(bi >= 0 for bi in b) else []
    found: dict[tuple, None] = {}
    for rows in itertools.combinations(range(len(A)), n):
        sub = [A[i] for i in rows]
        x = exact.solve(sub, [b[i] for i in rows])
        if x is None:
            continue
        if all(exact.dot(row, x) <= bi for row, bi in zip(A, b)):
            found[tuple(x)] = None
    return list(found)


def irredundant_rows(A: Rows, b: Sequence[Fraction]) -> list[int]:
    """Indices of a minimal subsystem with the same solution set (full-dimensional case)."""
    keep = list(range(len(A)))
    # duplicates and positive multiples first
    seen: dict[tuple, int] = {}
    for i in list(keep):
        row = A[i]
        if all(a == 0 for a in row):
            keep.remove(i)
            continue
        scale = max(abs(a) for a in row)
        key = tuple(a / scale for a in row)
        if key in seen:
            j = seen[key]
            if b[i] / scale < b[j] / max(abs(a) for a in A[j]):
                keep.remove(j)
                seen[key] = i
            else:
                keep.remove(i)
        else:
            seen[key] = i
    for i in list(keep):
        others = [j for j in keep if j != i]
        res = lp.maximize(A[i], [A[j] for j in others] or None, [b[j] for j in others] or None)
        if res.optimal and res.value <= b[i]:
            keep.remove(i)
    return keep


def cone_is_zero(A_ub: Rows, A_eq: Rows, n: int) -> bool:
    """Whether {u : A_ub u <= 0, A_eq u = 0} is the origin only."""
    box = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    box += [[-v for v in row] for row in box[:n]]
    A = list(A_ub) + box
    bb = [Fraction(0)] * len(A_ub) + [Fraction(1)] * (2 * n)
    for j in range(n):
        for sign in (1, -1):
            c = [Fraction(0)] * n
            c[j] = Fraction(sign)
            res = lp.maximize(c, A, bb, list(A_eq) or None, [Fraction(0)] * len(A_eq) or None)
            if res.optimal and res.value > 0:
                return False
    return True


def extreme_rays(A: Rows, n: int, A_eq: Rows = ()) -> tuple[list[tuple[Fraction, ...]], Rows]:
    """Extreme rays of {A u <= 0, A_eq u = 0} modulo its lineality space.

    Returns (rays, lineality_basis). Rays are chosen orthogonal to the
    lineality space and scaled so their first nonzero entry is +-1.
    """
    A_eq = list(A_eq)
    lin = exact.nullspace(list(A) + A_eq, n) if (A or A_eq) else exact.identity(n)
    eqs = A_eq + [list(v) for v in lin]
    target = n - 1
    rays: dict[tuple, None] = {}
    base_rank = exact.rank(eqs) if eqs else 0
    need = target - base_rank
    if need < 0:
        return [], lin
    for rows in itertools.combinations(range(len(A)), need):
        M = eqs + [A[i] for i in rows]
        if (exact.rank(M) if M else 0) != target:
            continue
        null = exact.nullspace(M, n)
        if len(null) != 1:
            continue
        r = null[0]
        for cand in (r, [-v for v in r]):
            if all(exact.dot(row, cand) <= 0 for row in A):
                rays[exact.primitive(cand)] = None
    return list(rays), lin
