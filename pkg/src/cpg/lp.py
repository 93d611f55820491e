"""Two-phase simplex over the rationals with Bland's rule.

Only what the polyhedral routines need: maximize ``c.x`` over free
variables subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``. Everything
is done in :class:`~fractions.Fraction`, so feasibility and optimality
verdicts are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from cpg.exact import frac_matrix, frac_vector

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    for i in range(len(T)):
        if i != r and T[i][c] != 0:
            f = T[i][c]
            T[i] = [a - f * b for a, b in zip(T[i], T[r])]
    basis[r] = c


def _run(T, basis, obj, columns) -> str:
    """Maximize obj over the tableau restricted to `columns`; Bland's rule."""
    rhs = len(T[0]) - 1
    while True:
        entering = None
        for j in columns:
            if j in basis:
                continue
            reduced = obj[j] - sum((obj[basis[i]] * T[i][j] for i in range(len(T))), Fraction(0))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            return OPTIMAL
        best = None
        for i in range(len(T)):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][rhs] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED
        _pivot(T, basis, best[1], entering)


def maximize(
    c: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
) -> LPResult:
    """Maximize ``c.x`` over free ``x``; returns an exact :class:`LPResult`."""
    c = frac_vector(c)
    n = len(c)
    A_ub = frac_matrix(A_ub or [])
    b_ub = frac_vector(b_ub or [])
    A_eq = frac_matrix(A_eq or [])
    b_eq = frac_vector(b_eq or [])
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq
    if m == 0:
        if any(ci != 0 for ci in c):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, tuple([Fraction(0)] * n), Fraction(0))

    # columns: x+ (n), x- (n), slacks (m_ub), artificials (m), rhs
    n_struct = 2 * n + m_ub
    width = n_struct + m + 1
    T: list[list[Fraction]] = []
    for i in range(m):
        row = [Fraction(0)] * width
        coeffs, rhs = (A_ub[i], b_ub[i]) if i < m_ub else (A_eq[i - m_ub], b_eq[i - m_ub])
        for j, a in enumerate(coeffs):
            row[j] = a
            row[n + j] = -a
        if i < m_ub:
            row[2 * n + i] = Fraction(1)
        row[-1] = rhs
        if rhs < 0:
            row = [-v for v in row]
        row[n_struct + i] = Fraction(1)
        T.append(row)
    basis = [n_struct + i for i in range(m)]

    phase1 = [Fraction(0)] * n_struct + [Fraction(-1)] * m + [Fraction(0)]
    _run(T, basis, phase1, range(width - 1))
    if sum((T[i][-1] for i in range(m) if basis[i] >= n_struct), Fraction(0)) != 0:
        return LPResult(INFEASIBLE)

    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(T):
        if basis[i] >= n_struct:
            col = next((j for j in range(n_struct) if T[i][j] != 0), None)
            if col is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, basis, i, col)
        i += 1
    T = [row[:n_struct] + [row[-1]] for row in T]

    obj = c + [-ci for ci in c] + [Fraction(0)] * m_ub + [Fraction(0)]
    if not T:
        if any(ci != 0 for ci in c):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, tuple([Fraction(0)] * n), Fraction(0))
    status = _run(T, basis, obj, range(n_struct))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    z = [Fraction(0)] * n_struct
    for i, bi in enumerate(basis):
        z[bi] = T[i][-1]
    x = tuple(z[j] - z[n + j] for j in range(n))
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, x, value)


def feasible_point(A_ub, b_ub, A_eq=None, b_eq=None, n: int | None = None) -> tuple[Fraction, ...] | None:
    """Any point satisfying the constraints, or None."""
    if n is None:
        n = len((A_ub or A_eq)[0])
    res = maximize([0] * n, A_ub, b_ub, A_eq, b_eq)
    return res.x if res.optimal else None
