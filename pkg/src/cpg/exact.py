"""Exact rational linear algebra on lists of :class:`fractions.Fraction`.

Matrices are plain row lists. These routines are meant for the small
systems that come up in polyhedral face and vertex computations, where a
rank decision must not depend on rounding.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Matrix = list  # list[list[Fraction]]


def to_fraction(value) -> Fraction:
    """Convert a scalar to a Fraction.

    Accepts ints, Fractions, decimal or ``"p/q"`` strings, ``[num, den]``
    pairs and floats (converted through their shortest repr, so ``0.1``
    becomes ``1/10``).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        return Fraction(to_fraction(num), to_fraction(den))
    if isinstance(value, numbers.Real):
        f = float(value)
        if not np.isfinite(f):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(f))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def is_rational_scalar(value) -> bool:
    return isinstance(value, (Fraction, numbers.Integral)) and not isinstance(value, bool)


def is_rational_vector(x) -> bool:
    if isinstance(x, np.ndarray) and x.dtype != object:
        return x.dtype.kind in "iu"
    return all(is_rational_scalar(v) for v in np.asarray(x, dtype=object).ravel())


def frac_vector(x: Iterable) -> list[Fraction]:
    return [to_fraction(v) for v in x]


def frac_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[to_fraction(v) for v in row] for row in rows]


def as_float(M) -> np.ndarray:
    return np.array(M, dtype=float)


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence[Fraction]], ncols: int | None = None) -> Matrix:
    if not M:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*M)]


def matmul(A: Sequence[Sequence[Fraction]], B: Sequence[Sequence[Fraction]]) -> Matrix:
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in A]


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def rref(M: Sequence[Sequence[Fraction]], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    R = [list(row) for row in M]
    if not R:
        return R, []
    m, n = len(R), len(R[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        piv = R[r][c]
        R[r] = [v / piv for v in R[r]]
        for i in range(m):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(M)[1]) if M else 0


def nullspace(M: Sequence[Sequence[Fraction]], n: int) -> Matrix:
    """Basis of {x : M x = 0} as a list of length-n vectors."""
    if not M:
        return identity(n)
    R, pivots = rref(M, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction] | None:
    """Unique solution of a square or overdetermined consistent system, else None."""
    if not A:
        return []
    n = len(A[0])
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, pivots = rref(aug, n + 1)
    if n in pivots or len(pivots) < n:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(R, pivots):
        x[p] = row[n]
    return x


def inverse(A: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(A)
    aug = [list(row) + e for row, e in zip(A, identity(n))]
    R, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def independent_rows(M: Sequence[Sequence[Fraction]]) -> list[int]:
    """Indices of a maximal linearly independent subset of rows, greedily in order."""
    chosen: list[int] = []
    basis: Matrix = []
    for i, row in enumerate(M):
        trial = basis + [list(row)]
        if rank(trial) > len(basis):
            basis = trial
            chosen.append(i)
    return chosen


def primitive(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale a nonzero vector so its first nonzero entry has absolute value 1."""
    lead = next(a for a in v if a != 0)
    s = abs(lead)
    return tuple(a / s for a in v)
