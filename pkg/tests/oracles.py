"""Independent reference implementations used to check the package.

Nothing here imports the code under test except plain data types, so a
shared bug cannot hide on both sides of a comparison.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, minimize

SIMPLE = "000 010 000 010 11 010 000 010 000"
KREWERAS = "000 010 000 010 10 000 000 000 001"
HADAMARD_12 = "101 011 110 101 01 110 101 011 110"
HADAMARD_21 = "101 001 110 010 11 010 101 001 110"
EXCEPTIONAL_1 = "100 000 001 000 00 000 100 111 001"
EXCEPTIONAL_2 = "100 000 100 101 00 010 001 000 001"

SIMPLE_VECTORS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
KREWERAS_VECTORS = [(-1, 0, 0), (0, -1, 0), (0, 0, -1), (1, 1, 1)]

# 2D scarecrows as (i, j) exponent lists, with the correlation of their inventory
SCARECROWS = {
    1: [(-1, -1), (0, 1), (1, 0), (-1, 1), (1, -1)],
    2: [(1, 1), (1, -1), (0, -1), (-1, 0), (-1, 1)],
    3: [(0, 1), (1, 1), (1, -1), (-1, -1), (-1, 0)],
}


def cross_section_oracle(text: str) -> set[tuple[int, int, int]]:
    """Decode a cross-section string by literal layer/row/column walking."""
    flags = [c for c in text if c in "01"]
    assert len(flags) == 26
    out, it = set(), iter(flags)
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if (dx, dy, dz) == (0, 0, 0):
                    continue
                if next(it) == "1":
                    out.add((dx, dy, dz))
    return out


def hadamard_12_embedding(t_exponents, u=((1,), (-1,)), v=((1,), (0,), (-1,))):
    """Steps of ``chi = U(x) + V(x) T(y, z)``, default ``U = x + 1/x`` and ``V = x + 1 + 1/x``."""
    steps = {(i[0], 0, 0) for i in u}
    for (vx,) in v:
        for (ty, tz) in t_exponents:
            steps.add((vx, ty, tz))
    return sorted(steps)


def brute_force_excursions(vectors, n: int) -> int:
    """Count length-n octant excursions by trying every step sequence."""
    total = 0
    for seq in itertools.product(vectors, repeat=n):
        p = [0, 0, 0]
        ok = True
        for s in seq:
            p = [p[0] + s[0], p[1] + s[1], p[2] + s[2]]
            if min(p) < 0:
                ok = False
                break
        if ok and p == [0, 0, 0]:
            total += 1
    return total


def brute_force_halfspace(vectors, rng, trials: int = 10_000) -> bool:
    """True if some random integer normal in [-3, 3]^3 has non-negative products with all steps."""
    v = np.array(vectors)
    normals = rng.integers(-3, 4, size=(trials, 3))
    normals = normals[np.any(normals != 0, axis=1)]
    return bool(np.any(np.all(normals @ v.T >= 0, axis=1)))


def lp_implied(vectors, given, target) -> bool:
    """Floating LP: minimize the target sum over the normalized cone of the given inequalities."""
    v = np.array(vectors, dtype=float)
    m = len(v)
    # a >= 0, sum a = 1, given sums >= 0; implied iff min target sum >= 0
    a_ub = -v[:, list(given)].T if given else None
    b_ub = np.zeros(len(given)) if given else None
    res = linprog(v[:, target], A_ub=a_ub, b_ub=b_ub, A_eq=np.ones((1, m)), b_eq=[1.0],
                  bounds=[(0, None)] * m, method="highs")
    if res.status == 2:
        # only a = 0 meets the given inequalities, so the target holds vacuously
        return True
    return res.status == 0 and res.fun >= -1e-9


def lp_dimension(vectors) -> int:
    for d in range(4):
        for given in itertools.combinations(range(3), d):
            rest = [i for i in range(3) if i not in given]
            if all(lp_implied(vectors, given, t) for t in rest):
                return d
    return 3


def critical_point_scipy(vectors, weights=None):
    """Minimize chi on the positive octant with a generic optimizer."""
    v = np.array(vectors, dtype=float)
    w = np.ones(len(v)) if weights is None else np.array(weights, dtype=float)
    f = lambda u: float(w @ np.exp(v @ u))
    g = lambda u: v.T @ (w * np.exp(v @ u))
    res = minimize(f, np.zeros(3), jac=g, method="BFGS", options={"gtol": 1e-12, "maxiter": 10_000})
    return np.exp(res.x), res.fun


def correlations_fd(vectors, point, h: float = 1e-5, weights=None):
    """Correlations from finite-difference second derivatives of chi."""
    v = np.array(vectors, dtype=float)
    w = np.ones(len(v)) if weights is None else np.array(weights, dtype=float)
    chi = lambda x: float(w @ np.prod(np.asarray(x)[None, :] ** v, axis=1))
    x0 = np.asarray(point, dtype=float)
    hess = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            ei, ej = np.eye(3)[i] * h, np.eye(3)[j] * h
            hess[i, j] = (chi(x0 + ei + ej) - chi(x0 + ei - ej) - chi(x0 - ei + ej) + chi(x0 - ei - ej)) / (4 * h * h)
    d = np.sqrt(np.diag(hess))
    r = hess / np.outer(d, d)
    return r[0, 1], r[0, 2], r[1, 2]


def angles_from_gram(vertices):
    """Interior angles from the spherical law of cosines applied to the side arcs."""
    v = np.asarray(vertices, dtype=float)
    out = []
    for i in range(3):
        p, q, r = v[i], v[(i + 1) % 3], v[(i + 2) % 3]
        a = math.acos(np.clip(q @ r, -1, 1))  # opposite side
        b = math.acos(np.clip(p @ r, -1, 1))
        c = math.acos(np.clip(p @ q, -1, 1))
        out.append(math.acos((math.cos(a) - math.cos(b) * math.cos(c)) / (math.sin(b) * math.sin(c))))
    return tuple(out)


def triangle_vertices_from_angles(alpha, beta, gamma):
    """Vertices (rows) of a spherical triangle with given angles, by the Gram matrix of sides."""
    ca, cb, cg = math.cos(alpha), math.cos(beta), math.cos(gamma)
    sa, sb, sg = math.sin(alpha), math.sin(beta), math.sin(gamma)
    cos_a = (ca + cb * cg) / (sb * sg)
    cos_b = (cb + ca * cg) / (sa * sg)
    cos_c = (cg + ca * cb) / (sa * sb)
    gram = np.array([[1, cos_c, cos_b], [cos_c, 1, cos_a], [cos_b, cos_a, 1]])
    return np.linalg.cholesky(gram)


def compose_maps_exact(vectors, point):
    """The three involutions written out directly from the step list, exact rationals."""
    x, y, z = (Fraction(c) for c in point)
    mono = lambda s, a, b, c: a ** s[0] * b ** s[1] * c ** s[2]

    def sec(axis, sign, p):
        return sum(
            (mono(tuple(0 if k == axis else s[k] for k in range(3)), *p) for s in vectors if s[axis] == sign),
            Fraction(0),
        )

    p = (x, y, z)
    phi = (sec(0, -1, p) / (x * sec(0, 1, p)), y, z)
    psi = (x, sec(1, -1, p) / (y * sec(1, 1, p)), z)
    tau = (x, y, sec(2, -1, p) / (z * sec(2, 1, p)))
    return phi, psi, tau


def wynn_reference(seq):
    """Textbook epsilon table with a full 2D array (no singular-entry handling)."""
    n = len(seq)
    eps = np.zeros((n + 1, n + 1))
    eps[:n, 1] = seq
    for k in range(2, n + 1):
        for i in range(n - k + 1):
            eps[i, k] = eps[i + 1, k - 2] + 1.0 / (eps[i + 1, k - 1] - eps[i, k - 1])
    last_even = n if n % 2 == 1 else n - 1
    return eps[0, last_even]
