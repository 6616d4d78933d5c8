"""Closed-form Dirichlet eigenvalues on spherical domains and exponent formulas."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .critical import CriticalData, minimize_exp_sum
from .errors import DomainError, HalfSpacePrecondition, UnsupportedTriple
from .stepset import Inventory, halfspace_witness

# nu = offset + sum_i coef_i * l_i over l_i >= 0
_TILING_LATTICES = {
    (2, 3, 3): (6, (3, 4)),
    (2, 3, 4): (9, (6, 6)),
    (2, 3, 5): (15, (6, 10)),
}


def birectangular_lambda1(beta: float) -> float:
    """Principal eigenvalue of the triangle with angles pi/2, pi/2, beta."""
    if not 0.0 < beta < math.pi:
        raise DomainError(f"beta must lie in (0, pi), got {beta}")
    r = math.pi / beta
    return (r + 1.0) * (r + 2.0)


def digon_lambda1(alpha: float) -> float:
    """Principal eigenvalue of the spherical digon of opening ``alpha``."""
    if not 0.0 < alpha <= math.pi:
        raise DomainError(f"alpha must lie in (0, pi], got {alpha}")
    r = math.pi / alpha
    return r * (r + 1.0)


def _tiling_lattice(p: int, q: int, r: int) -> tuple[int, tuple[int, int]]:
    key = tuple(sorted((p, q, r)))
    if key in _TILING_LATTICES:
        return _TILING_LATTICES[key]
    if key[0] == 2 and key[1] == 2 and key[2] >= 2:
        m = key[2]
        return m + 1, (2, m)
    raise UnsupportedTriple(f"no tiling spectrum for (p, q, r) = {(p, q, r)}")


def tiling_eigenvalues(p: int, q: int, r: int, count: int = 1) -> list[int]:
    """First ``count`` eigenvalues ``nu (nu + 1)`` of the tiling triangle, with multiplicity."""
    offset, (c1, c2) = _tiling_lattice(p, q, r)
    # each pair (l1, l2) contributes one eigenvalue; pop them in increasing nu
    heap = [(offset, 0, 0)]
    seen = {(0, 0)}
    out = []
    while len(out) < count:
        nu, l1, l2 = heapq.heappop(heap)
        out.append(nu * (nu + 1))
        for n1, n2 in ((l1 + 1, l2), (l1, l2 + 1)):
            if (n1, n2) not in seen:
                seen.add((n1, n2))
                heapq.heappush(heap, (offset + c1 * n1 + c2 * n2, n1, n2))
    return out


def legendre_p(nu: float, x: float) -> float:
    """``P_nu(x) = 2F1(-nu, nu + 1; 1; (1 - x) / 2)`` by its power series, ``-1 < x <= 1``.

    Terms grow before they decay when ``nu**2 * (1 - x)`` is large, so
    accuracy there is limited by cancellation.  Cap roots never need that
    regime: the first root has ``nu**2 * (1 - x)`` of order one.
    """
    t = 0.5 * (1.0 - x)
    term, total, biggest = 1.0, 1.0, 1.0
    k = 0
    while True:
        term *= (k - nu) * (k + nu + 1.0) / ((k + 1.0) ** 2) * t
        total += term
        biggest = max(biggest, abs(term))
        k += 1
        if abs(term) < 1e-16 * biggest or k > 200_000:
            return total


def cap_lambda1(zeta: float, tol: float = 1e-10) -> float:
    """Principal eigenvalue of the spherical cap of angular radius ``zeta``."""
    if not 0.0 < zeta < math.pi:
        raise DomainError(f"zeta must lie in (0, pi), got {zeta}")
    x = math.cos(zeta)
    f = lambda nu: legendre_p(nu, x)
    # P_0 = 1 > 0; grow the bracket slowly so the first sign change is not skipped
    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        lo, hi = hi, hi * 1.25
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    return nu * (nu + 1.0)


def excursion_exponent(lambda1: float) -> float:
    """Excursion exponent ``sqrt(lambda1 + 1/4) + 1`` in dimension three."""
    if lambda1 < 0:
        raise DomainError("lambda1 must be non-negative")
    return math.sqrt(lambda1 + 0.25) + 1.0


def cone_exponent(d: int, lambda1_section: float) -> float:
    """Exit exponent of Brownian motion from a cone in R^d with given section eigenvalue."""
    if d < 2 or lambda1_section < 0:
        raise DomainError("need d >= 2 and a non-negative eigenvalue")
    h = 1.0 - d / 2.0
    return math.sqrt(lambda1_section + h * h) + h


# -- total number of walks ---------------------------------------------------


@dataclass(frozen=True)
class TotalWalks:
    case: str
    beta: float | None
    minimizer: tuple[float, float, float]
    drift: tuple[Fraction, Fraction, Fraction]


def minimize_on_unit_box(inv: Inventory) -> np.ndarray:
    """Minimizer of ``chi`` over ``[1, inf)^3``, by KKT enumeration of the faces.

    In log coordinates the feasible set is ``u >= 0``.  For each choice of
    coordinates pinned at zero the remaining problem is unconstrained; it
    has a minimizer iff the projected exponents are not in a half-space.
    The face whose minimizer has non-negative partial derivatives in the
    pinned directions is the constrained optimum.
    """
    e = np.array(list(inv.terms), dtype=float)
    w = inv.coefficients
    best = None
    for pinned in itertools.chain.from_iterable(
        itertools.combinations(range(3), k) for k in range(4)
    ):
        free = [i for i in range(3) if i not in pinned]
        u = np.zeros(3)
        if free:
            proj = [tuple(int(c) for c in row[free]) for row in e]
            if halfspace_witness(proj) is not None:
                continue
            uf, _, _ = minimize_exp_sum(e[:, free], w)
            if np.any(uf < -1e-12):
                continue
            u[free] = np.maximum(uf, 0.0)
        g = e.T @ (w * np.exp(e @ u))
        if all(g[i] >= -1e-10 for i in pinned):
            best = u
            break
    if best is None:
        raise HalfSpacePrecondition("no constrained minimizer found on [1, inf)^3")
    return np.exp(best)


def total_walks_exponent(inv: Inventory, cp: CriticalData | None, lambda1: float) -> TotalWalks:
    """Exponent ``beta`` of the total number of octant walks, when a known regime applies."""
    witness = halfspace_witness(list(inv.terms))
    if witness is not None:
        raise HalfSpacePrecondition(f"steps lie in a half-space (normal {witness})", witness)
    drift = inv.drift()
    xmin = minimize_on_unit_box(inv)
    lam = excursion_exponent(lambda1)
    if all(d == 0 for d in drift):
        case, beta = "ZeroDrift", lam / 2.0 - 0.75
    elif all(d > 0 for d in drift):
        case, beta = "PositiveDrift", 0.0
    elif np.all(np.log(xmin) > 1e-9):
        case, beta = "InteriorMinimum", lam
    else:
        case, beta = "Unresolved", None
    return TotalWalks(case, beta, tuple(float(v) for v in xmin), drift)


# -- rationality probe -------------------------------------------------------


@dataclass(frozen=True)
class RationalityProbe:
    verdict: str
    best: Fraction
    gap: float


def rationality_probe(c: float, max_denominator: int = 10**6) -> RationalityProbe:
    """Search the continued-fraction convergents of ``pi / arccos(-c)`` for an exact hit."""
    if not abs(c) < 1.0:
        raise DomainError("need |c| < 1")
    target = math.pi / math.acos(-c)
    frac = Fraction(target)
    h0, h1, k0, k1 = 0, 1, 1, 0
    best, gap = Fraction(round(target)), abs(target - round(target))
    rest = frac
    while True:
        a = math.floor(rest)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_denominator:
            break
        conv = Fraction(h1, k1)
        err = abs(target - h1 / k1)
        best, gap = conv, err
        if err <= 1e-12:
            return RationalityProbe("LikelyRational", conv, err)
        if rest == a:
            break
        rest = 1 / (rest - a)
    return RationalityProbe("NoSmallRational", best, gap)
