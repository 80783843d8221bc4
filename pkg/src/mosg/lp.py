"""Exact-rational feasibility via a dense Phase I simplex with Bland's rule."""
from __future__ import annotations

from gmpy2 import mpq

from .rational import ZERO


def feasible(A, b) -> bool:
    """Decide whether {x >= 0 : A x = b} is nonempty, exactly.

    `A` is a list of rows, `b` a list of right-hand sides (any signs).
    """
    m = len(A)
    if m == 0:
        return True
    n = len(A[0])
    rows = []
    for i in range(m):
        r = [mpq(v) for v in A[i]]
        rhs = mpq(b[i])
        if rhs < 0:
            r = [-v for v in r]
            rhs = -rhs
        # artificial columns n..n+m-1
        art = [ZERO] * m
        art[i] = mpq(1)
        rows.append(r + art + [rhs])
    width = n + m
    basis = list(range(n, n + m))
    # objective: minimise sum of artificials -> reduced costs row
    cost = [ZERO] * (width + 1)
    for r in rows:
        for j in range(width + 1):
            cost[j] -= r[j]
    for j in range(n, n + m):
        cost[j] = ZERO
    while True:
        # Bland: smallest index with negative reduced cost
        enter = -1
        for j in range(width):
            if cost[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            # unbounded direction for a bounded-below objective cannot happen
            break
        piv = rows[leave][enter]
        prow = [v / piv for v in rows[leave]]
        rows[leave] = prow
        for i in range(m):
            if i != leave:
                f = rows[i][enter]
                if f:
                    rows[i] = [u - f * v for u, v in zip(rows[i], prow)]
        f = cost[enter]
        cost = [u - f * v for u, v in zip(cost, prow)]
        basis[leave] = enter
    return cost[width] == 0


def dominated_by_hull(g, others) -> bool:
    """True iff some convex combination of `others` is >= g componentwise."""
    if not others:
        return False
    n = len(g)
    k = len(others)
    # variables: lambda_1..k, surplus_1..n
    A = [[mpq(1)] * k + [ZERO] * n]
    b = [mpq(1)]
    for i in range(n):
        row = [mpq(h[i]) for h in others] + [ZERO] * n
        row[k + i] = mpq(-1)
        A.append(row)
        b.append(mpq(g[i]))
    return feasible(A, b)
