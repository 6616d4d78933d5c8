"""Exact feasibility of ``A x = b, x >= 0`` over the rationals.

Phase I of the simplex method with Bland's rule, carried out in
:class:`fractions.Fraction` so that boundary cases are never misjudged.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def feasible_point(a_eq: Sequence[Sequence], b_eq: Sequence) -> list[Fraction] | None:
    """Return some ``x >= 0`` with ``A x = b``, or ``None`` if there is none.

    Parameters
    ----------
    a_eq : m x n nested sequence of rationals
    b_eq : length-m sequence of rationals
    """
    rows = [[Fraction(v) for v in row] for row in a_eq]
    rhs = [Fraction(v) for v in b_eq]
    m = len(rows)
    n = len(rows[0]) if m else 0
    if m == 0:
        return [Fraction(0)] * n
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]

    # tableau columns: n originals, then m artificials
    width = n + m
    tab = [rows[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    # reduced costs of the phase-I objective (sum of artificials)
    cost = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(n):
            cost[j] -= tab[i][j]
        cost[width] -= tab[i][width]

    while True:
        entering = next((j for j in range(width) if cost[j] < 0), None)
        if entering is None:
            break
        leaving, best = None, None
        for i in range(m):
            piv = tab[i][entering]
            if piv > 0:
                ratio = tab[i][width] / piv
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    leaving, best = i, ratio
        if leaving is None:
            # unbounded direction cannot occur for a bounded-below phase-I objective
            break
        piv = tab[leaving][entering]
        tab[leaving] = [v / piv for v in tab[leaving]]
        for i in range(m):
            if i != leaving and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [vi - f * vl for vi, vl in zip(tab[i], tab[leaving])]
        f = cost[entering]
        cost = [vc - f * vl for vc, vl in zip(cost, tab[leaving])]
        basis[leaving] = entering

    if cost[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tab[i][width]
    return x
