"""Exact phase-1 simplex over the rationals.

Decides whether ``A x = b, x >= 0`` has a solution.  Either a solution is
returned, or a Farkas vector ``z`` with ``A^T z >= 0`` and ``b^T z < 0``, which
proves that none exists.  Pivoting follows Bland's rule, so the method
terminates without tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

_ZERO = Fraction(0)


@dataclass
class FeasibilityResult:
    feasible: bool
    x: list | None = None
    farkas: list | None = None
    pivots: int = 0


def find_feasible_point(A: Sequence[Sequence], b: Sequence) -> FeasibilityResult:
    """Solve ``A x = b, x >= 0`` exactly.

    The tableau is kept in integers with a common denominator ``det``
    (integer-preserving pivoting), so no rational normalisation happens
    inside the loop.

    Args:
        A: ``m`` rows of ``n`` rationals (ints or Fractions).
        b: ``m`` rationals.

    Returns:
        ``FeasibilityResult`` with ``x`` (length ``n``) when feasible, or
        ``farkas`` (length ``m``) when infeasible.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if len(b) != m:
        raise ValueError("A and b have different row counts")
    width = n + m
    if any(len(row) != n for row in A):
        raise ValueError("ragged constraint matrix")
    # each row is scaled to integers with b >= 0; artificials stay unit columns
    rows, scales = [], []
    for r in range(m):
        fr = [Fraction(v) for v in A[r]] + [Fraction(b[r])]
        k = math.lcm(*(v.denominator for v in fr)) * (1 if fr[-1] >= 0 else -1)
        row = [int(v * k) for v in fr[:n]] + [0] * m + [int(fr[n] * k)]
        row[n + r] = 1
        rows.append(row)
        scales.append(k)
    # phase-1 reduced costs: 1 on artificials minus the sum of all rows; the
    # tableau holds det times the true values, basic columns equal det * e_r
    cost = [0] * (width + 1)
    for row in rows:
        for c in range(n):
            cost[c] -= row[c]
    basis = [n + r for r in range(m)]
    det = 1
    pivots = 0
    while True:
        entering = next((c for c in range(width) if cost[c] < 0), None)
        if entering is None:
            break
        best = None
        for r in range(m):
            a = rows[r][entering]
            if a > 0:
                rh = rows[r][width]
                if best is None:
                    best = r
                    continue
                ba, brh = rows[best][entering], rows[best][width]
                lhs, rhs_ = rh * ba, brh * a
                if lhs < rhs_ or (lhs == rhs_ and basis[r] < basis[best]):
                    best = r
        # phase 1 is bounded below by 0, so a positive entry always exists
        prow = rows[best]
        p = prow[entering]
        for k in range(m + 1):
            if k == best:
                continue
            other = rows[k] if k < m else cost
            f = other[entering]
            if f:
                for c in range(width + 1):
                    other[c] = (p * other[c] - f * prow[c]) // det
            else:
                for c in range(width + 1):
                    other[c] = p * other[c] // det
        basis[best] = entering
        det = p
        pivots += 1

    if all(rows[r][width] == 0 for r in range(m) if basis[r] >= n):
        x = [_ZERO] * n
        for r, v in enumerate(basis):
            if v < n:
                x[v] = Fraction(rows[r][width], det)
        return FeasibilityResult(True, x=x, pivots=pivots)
    # duals of the phase-1 problem: y_r = 1 - reduced cost of artificial r;
    # then A'^T y <= 0 and b'^T y > 0, so z = -D y certifies infeasibility
    farkas = [-(1 - Fraction(cost[n + r], det)) * scales[r] for r in range(m)]
    return FeasibilityResult(False, farkas=farkas, pivots=pivots)


def check_farkas(A: Sequence[Sequence], b: Sequence, z: Sequence) -> bool:
    """True iff ``A^T z >= 0`` and ``b^T z < 0`` hold exactly."""
    m = len(A)
    n = len(A[0]) if m else 0
    for c in range(n):
        if sum(Fraction(A[r][c]) * z[r] for r in range(m) if A[r][c]) < 0:
            return False
    return sum(Fraction(b[r]) * z[r] for r in range(m)) < 0


def check_solution(A: Sequence[Sequence], b: Sequence, x: Sequence) -> bool:
    if any(v < 0 for v in x):
        return False
    return all(sum(Fraction(a) * v for a, v in zip(row, x) if a) == rhs
               for row, rhs in zip(A, b))
