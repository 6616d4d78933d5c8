"""Octant excursion counts by dynamic programming, and asymptotic fits.

Counts are propagated on the box ``[0, B]^3``.  At step ``m`` of an
``N``-step run only cells that can still return to the origin within the
remaining ``N - m`` steps are kept, which never changes the excursion
counts ``o(n)`` for ``n <= N``.  Two arithmetic modes exist: exact
(Python integers, or fractions for weighted steps) and scaled float64,
where the array is renormalized after every step and the log scale is
tracked separately so that large ``N`` neither overflows nor underflows.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import AllZero, InsufficientData, MemoryGuard
from .stepset import StepSet

MAX_CELLS = 60_000_000
MAX_EXACT_CELLS = 3_000_000


@dataclass
class SeriesTable:
    """Excursion counts ``o(0,0,0; n)`` for ``n = 0..N``.

    ``counts`` holds exact values (ints or Fractions) in exact mode and is
    ``None`` otherwise; ``log_counts`` always holds natural logarithms, with
    ``-inf`` for zero counts.
    """

    log_counts: list[float]
    counts: list | None
    box: int
    truncated: bool
    exact: bool
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.log_counts) - 1

    def nonzero_indices(self) -> list[int]:
        return [n for n, v in enumerate(self.log_counts) if v != -math.inf]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "count" if self.exact else "log_count"])
        values = self.counts if self.exact else self.log_counts
        for n, v in enumerate(values):
            w.writerow([n, v if self.exact else repr(v)])
        return buf.getvalue()


def _safe_log(v) -> float:
    if v == 0:
        return -math.inf
    if isinstance(v, Fraction):
        return math.log(v.numerator) - math.log(v.denominator)
    return math.log(v)


def count_excursions(s: StepSet, N: int, box: int | None = None, exact: bool = True) -> SeriesTable:
    """Number of ``n``-step octant walks from the origin back to the origin, ``n <= N``.

    Parameters
    ----------
    s : StepSet
    N : int
        Largest walk length.
    box : int, optional
        Coordinate bound of the DP box.  Defaults to the smallest bound that
        cannot truncate any excursion of length at most ``N``.
    exact : bool
        Exact big-integer arithmetic when true, scaled float64 otherwise.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    vecs = np.array(s.vectors, dtype=int)
    up = np.maximum(vecs.max(axis=0), 0)
    down = np.maximum(-vecs.min(axis=0), 0)
    # an excursion of length N reaches at most min(m up, (N - m) down) per axis
    safe = [int(max(min(m * u, (N - m) * d) for m in range(N + 1))) for u, d in zip(up, down)]
    need = max(safe) if safe else 0
    if box is None:
        box = max(need, 1)
    if box < 1:
        raise ValueError("box must be at least 1")
    truncated = box < need
    cells = (box + 1) ** 3
    if cells > (MAX_EXACT_CELLS if exact else MAX_CELLS):
        raise MemoryGuard(f"DP box with {cells} cells exceeds the configured cap")

    weights = s.weights
    unit = all(w == 1 for w in weights)
    if exact:
        dtype = object
        ws = [int(w) if unit else Fraction(w) for w in weights]
        zero = 0 if unit else Fraction(0)
    else:
        dtype = float
        ws = [float(w) for w in weights]
        zero = 0.0

    cur = np.full((box + 1,) * 3, zero, dtype=dtype)
    cur[0, 0, 0] = 1 if exact else 1.0
    log_scale = 0.0
    out_exact = [cur[0, 0, 0]]
    out_log = [0.0]
    hi = np.zeros(3, dtype=int)  # current extent of the live region
    for m in range(1, N + 1):
        rem = N - m
        lim = np.minimum(np.minimum(m * up, rem * down), box)
        nxt = np.full(tuple(lim + 1), zero, dtype=dtype)
        for v, w in zip(vecs, ws):
            src, dst = [], []
            ok = True
            for ax in range(3):
                lo_d = max(0, v[ax])
                hi_d = min(hi[ax] + v[ax], lim[ax])
                if hi_d < lo_d:
                    ok = False
                    break
                dst.append(slice(lo_d, hi_d + 1))
                src.append(slice(lo_d - v[ax], hi_d - v[ax] + 1))
            if ok:
                block = cur[tuple(src)]
                nxt[tuple(dst)] += block if (exact and unit) else w * block
        cur, hi = nxt, lim
        if exact:
            val = cur[0, 0, 0]
            out_exact.append(val)
            out_log.append(_safe_log(val))
        else:
            peak = float(cur.max()) if cur.size else 0.0
            val = float(cur[0, 0, 0])
            out_log.append(math.log(val) + log_scale if val > 0 else -math.inf)
            if peak > 0:
                cur /= peak
                log_scale += math.log(peak)
    return SeriesTable(
        log_counts=out_log,
        counts=out_exact if exact else None,
        box=box,
        truncated=truncated,
        exact=exact,
    )


def period(series: SeriesTable) -> int:
    """gcd of the positive lengths with a nonzero count, over the computed range."""
    idx = [n for n in series.nonzero_indices() if n > 0]
    if not idx:
        raise AllZero(f"no excursion of length 1..{series.N}")
    return reduce(math.gcd, idx)


# -- fits ----------------------------------------------------------------------


def richardson(values, ns, order: int = 3) -> float:
    """Limit of ``values[k] ~ L + c_1/n_k + ... + c_order/n_k**order``.

    The expansion is fitted by least squares over all given points; solving
    on the last ``order + 1`` adjacent points instead is badly conditioned.
    """
    vals = np.asarray(values, dtype=float)
    n = np.asarray(ns, dtype=float)
    if len(n) < order + 1:
        raise InsufficientData(f"need {order + 1} points for order {order}")
    a = np.vander(1.0 / n, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(a, vals, rcond=None)
    return float(coef[0])


def aitken(seq) -> float:
    """Aitken delta-squared estimate from the last three terms."""
    x0, x1, x2 = seq[-3:]
    den = x2 - 2 * x1 + x0
    return float(x2 if den == 0 else x2 - (x2 - x1) ** 2 / den)


@dataclass(frozen=True)
class ExponentFit:
    rho_hat: float
    lambda_hat: float
    diagnostics: dict


def growth_and_exponent_fit(
    series: SeriesTable,
    p: int | None = None,
    rho_predicted: float | None = None,
    order: int = 3,
) -> ExponentFit:
    """Fit ``o(pn) ~ kappa rho^(pn) n^(-lambda)`` on the period lattice.

    The first 20% of indices are discarded.  ``rho_hat`` is the Richardson
    limit of ``(o(p(n+1)) / o(pn))^(1/p)``.  ``lambda_hat`` is the Richardson
    limit of the local slopes of ``log(o(pn) rho^(-pn))`` against ``log n``,
    with ``rho = rho_predicted`` when given and ``rho_hat`` otherwise.
    """
    if p is None:
        p = period(series)
    logs = series.log_counts
    ns = [n for n in range(1, series.N // p + 1) if logs[p * n] != -math.inf]
    start = int(math.ceil(0.2 * (series.N // p)))
    ns = [n for n in ns if n >= max(start, 1)]
    # consecutive lattice points only
    ns = [n for n in ns if n + 1 in ns or n - 1 in ns]
    if len(ns) < 30:
        raise InsufficientData(f"need 30 nonzero terms on the period lattice, got {len(ns)}")
    ln = np.array([logs[p * n] for n in ns])
    narr = np.array(ns, dtype=float)

    log_ratio = np.diff(ln) / p
    rho_seq = np.exp(log_ratio)
    # both the log ratio and the local slope between n and n+1 are centred near n + 1/2
    centres = 0.5 * (narr[1:] + narr[:-1])
    rho_hat = float(np.exp(richardson(log_ratio, centres, order)))
    rho_use = rho_predicted if rho_predicted is not None else rho_hat

    reduced = ln - p * narr * math.log(rho_use)
    slopes = -np.diff(reduced) / np.log(narr[1:] / narr[:-1])
    lambda_hat = richardson(slopes, centres, order)
    diagnostics = {
        "period": p,
        "n_used": len(ns),
        "rho_last_ratio": float(rho_seq[-1]),
        "rho_aitken": aitken(list(rho_seq)),
        "lambda_last_slope": float(slopes[-1]),
        "rho_used": float(rho_use),
    }
    return ExponentFit(rho_hat, float(lambda_hat), diagnostics)
