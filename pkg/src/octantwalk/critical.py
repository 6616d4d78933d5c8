"""Critical point of the inventory, covariance, and the spherical triangle.

The inventory is minimized over the open positive octant in logarithmic
coordinates, where it becomes a positive sum of exponentials.  Under the
half-space hypothesis that function is strictly convex and coercive, so a
damped Newton iteration from the origin converges to the unique minimizer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCovariance, HalfSpacePrecondition, NoConvergence, NotRealizable
from .stepset import Inventory, halfspace_witness

NEWTON_MAX_ITER = 200
NEWTON_GTOL = 1e-13
RESIDUAL_TOL = 1e-12
DET_TOL = 1e-12


@dataclass(frozen=True)
class CriticalData:
    point: np.ndarray
    rho: float
    residual: float
    iterations: int = 0


@dataclass(frozen=True)
class CovarianceData:
    a: float
    b: float
    c: float
    matrix: np.ndarray
    cholesky_L: np.ndarray

    @property
    def det(self) -> float:
        return covariance_det(self.a, self.b, self.c)

    @property
    def correlations(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class SphericalTriangle:
    """Spherical triangle with vertex ``i`` carrying angle ``i`` and facing side ``i``.

    Attributes
    ----------
    vertices : ndarray, shape (3, 3)
        Unit vectors, one per row.
    angles : tuple of float
        Interior angles at the three vertices.
    side_lengths : tuple of float
        Arc length of the side opposite each vertex.
    """

    vertices: np.ndarray
    angles: tuple[float, float, float]
    side_lengths: tuple[float, float, float]

    @property
    def excess(self) -> float:
        return float(sum(self.angles) - np.pi)


# -- Newton minimization of exponential sums ------------------------------


def minimize_exp_sum(exponents, weights, *, max_iter=NEWTON_MAX_ITER, gtol=NEWTON_GTOL):
    """Minimize ``F(u) = sum_s w_s exp(<s, u>)`` by damped Newton from ``u = 0``.

    Returns ``(u, grad, iterations)``.  ``F`` must be coercive, which holds
    exactly when the exponents are not contained in a closed half-space.
    """
    e = np.asarray(exponents, dtype=float)
    w = np.asarray(weights, dtype=float)
    u = np.zeros(e.shape[1])

    def parts(u):
        terms = w * np.exp(e @ u)
        return terms.sum(), e.T @ terms, (e.T * terms) @ e

    f, g, h = parts(u)
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) <= gtol:
            return u, g, it - 1
        step = np.linalg.solve(h, -g)
        t = 1.0
        decrement = float(g @ step)
        while True:
            cand = u + t * step
            f_new = float((w * np.exp(e @ cand)).sum())
            if f_new <= f + 1e-4 * t * decrement or t < 1e-12:
                break
            if t == 1.0:
                # near the minimum f stalls at rounding level; the gradient still shrinks
                g_new = e.T @ (w * np.exp(e @ cand))
                if np.max(np.abs(g_new)) < 0.5 * np.max(np.abs(g)):
                    break
            t *= 0.5
        if np.array_equal(cand, u):
            return u, g, it
        u = cand
        f, g, h = parts(u)
    return u, g, max_iter


def gradient(inv: Inventory, point) -> np.ndarray:
    """Gradient of ``chi`` in the original coordinates."""
    x = np.asarray(point, dtype=float)
    e = inv.exponents
    mono = inv.coefficients * np.prod(x[None, :] ** e, axis=1)
    return (e.T @ mono) / x


def hessian(inv: Inventory, point) -> np.ndarray:
    """Hessian ``sum_s w s_i (s_j - delta_ij) x^s / (x_i x_j)``."""
    x = np.asarray(point, dtype=float)
    e = inv.exponents
    mono = inv.coefficients * np.prod(x[None, :] ** e, axis=1)
    h = np.einsum("s,si,sj->ij", mono, e, e) - np.diag(e.T @ mono)
    return h / np.outer(x, x)


def find_critical_point(inv: Inventory) -> CriticalData:
    """Unique minimizer of ``chi`` on the open positive octant."""
    witness = halfspace_witness(list(inv.terms))
    if witness is not None:
        raise HalfSpacePrecondition(
            f"steps lie in the half-space with normal {witness}", witness=witness
        )
    u, _, iters = minimize_exp_sum(inv.exponents, inv.coefficients)
    point = np.exp(u)
    residual = float(np.max(np.abs(gradient(inv, point))))
    if residual > RESIDUAL_TOL:
        raise NoConvergence(f"critical point residual {residual:.3g} after {iters} Newton steps")
    return CriticalData(point=point, rho=inv(point), residual=residual, iterations=iters)


# -- covariance and Cholesky factor ----------------------------------------


def covariance_det(a: float, b: float, c: float) -> float:
    return 1.0 - a * a - b * b - c * c + 2.0 * a * b * c


def cholesky_factor(a: float, b: float, c: float) -> np.ndarray:
    """Closed-form lower Cholesky factor of ``[[1,a,b],[a,1,c],[b,c,1]]``."""
    s = np.sqrt(1.0 - a * a)
    d = np.sqrt(covariance_det(a, b, c))
    return np.array([[1.0, 0.0, 0.0], [a, s, 0.0], [b, (c - a * b) / s, d / s]])


def cholesky_inverse(a: float, b: float, c: float) -> np.ndarray:
    """Closed-form inverse of :func:`cholesky_factor`."""
    s = np.sqrt(1.0 - a * a)
    d = np.sqrt(covariance_det(a, b, c))
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [-a / s, 1.0 / s, 0.0],
            [(a * c - b) / (s * d), (a * b - c) / (s * d), s / d],
        ]
    )


def covariance_from_correlations(a: float, b: float, c: float) -> CovarianceData:
    if max(abs(a), abs(b), abs(c)) >= 1.0 or covariance_det(a, b, c) <= DET_TOL:
        raise DegenerateCovariance(
            f"covariance with (a, b, c) = ({a:.6g}, {b:.6g}, {c:.6g}) is not positive definite"
        )
    matrix = np.array([[1.0, a, b], [a, 1.0, c], [b, c, 1.0]])
    return CovarianceData(a, b, c, matrix, cholesky_factor(a, b, c))


def covariance(inv: Inventory, cp: CriticalData) -> CovarianceData:
    """Correlations of the second partial derivatives at the critical point."""
    h = hessian(inv, cp.point)
    diag = np.sqrt(np.diag(h))
    if np.any(diag <= 0):
        raise DegenerateCovariance("a diagonal second derivative vanishes")
    r = h / np.outer(diag, diag)
    return covariance_from_correlations(float(r[0, 1]), float(r[0, 2]), float(r[1, 2]))


# -- spherical triangles ----------------------------------------------------


def _normalize(v):
    return v / np.linalg.norm(v)


def vertex_angles(vertices) -> tuple[float, float, float]:
    """Interior angles from unit tangent vectors at each vertex."""
    v = np.asarray(vertices, dtype=float)
    out = []
    for i in range(3):
        p, q, r = v[i], v[(i + 1) % 3], v[(i + 2) % 3]
        tq = _normalize(q - (p @ q) * p)
        tr = _normalize(r - (p @ r) * p)
        out.append(float(np.arccos(np.clip(tq @ tr, -1.0, 1.0))))
    return tuple(out)


def vertex_sides(vertices) -> tuple[float, float, float]:
    """Arc length of the side opposite each vertex."""
    v = np.asarray(vertices, dtype=float)
    return tuple(
        float(np.arccos(np.clip(v[(i + 1) % 3] @ v[(i + 2) % 3], -1.0, 1.0))) for i in range(3)
    )


def side_cosines(a: float, b: float, c: float) -> tuple[float, float, float]:
    """Cosines of the sides opposite the angles ``arccos(-a), arccos(-b), arccos(-c)``."""
    return (
        (b * c - a) / np.sqrt((1 - b * b) * (1 - c * c)),
        (a * c - b) / np.sqrt((1 - a * a) * (1 - c * c)),
        (a * b - c) / np.sqrt((1 - a * a) * (1 - b * b)),
    )


def triangle_from_vertices(vertices) -> SphericalTriangle:
    v = np.array([_normalize(np.asarray(p, dtype=float)) for p in vertices])
    if abs(np.linalg.det(v)) < 1e-14:
        raise DegenerateCovariance("triangle vertices are linearly dependent")
    return SphericalTriangle(v, vertex_angles(v), vertex_sides(v))


def triangle_of(cov: CovarianceData) -> SphericalTriangle:
    """Image of the octant under ``L^{-1}``, intersected with the sphere.

    The normalized columns ``L^{-1} e_3, L^{-1} e_2, L^{-1} e_1`` are stored
    in this order so that the vertex with index ``i`` carries the angle
    ``arccos(-a), arccos(-b), arccos(-c)`` respectively.
    """
    if cov.det <= DET_TOL:
        raise DegenerateCovariance(f"covariance determinant {cov.det:.3g} too small")
    linv = cholesky_inverse(cov.a, cov.b, cov.c)
    cols = [_normalize(linv[:, j]) for j in (2, 1, 0)]
    v = np.array(cols)
    angles = tuple(float(np.arccos(-t)) for t in (cov.a, cov.b, cov.c))
    sides = tuple(float(np.arccos(np.clip(t, -1.0, 1.0))) for t in side_cosines(cov.a, cov.b, cov.c))
    return SphericalTriangle(v, angles, sides)


def polar_triangle(t: SphericalTriangle) -> SphericalTriangle:
    """Polar triangle: vertex ``i`` is the pole of side ``i`` on the side of vertex ``i``."""
    v = np.asarray(t.vertices, dtype=float)
    out = []
    for i in range(3):
        n = _normalize(np.cross(v[(i + 1) % 3], v[(i + 2) % 3]))
        out.append(n if n @ v[i] > 0 else -n)
    out = np.array(out)
    angles = tuple(float(np.pi - s) for s in t.side_lengths)
    sides = tuple(float(np.pi - a) for a in t.angles)
    return SphericalTriangle(out, angles, sides)


def triangle_from_angles(angles) -> SphericalTriangle:
    """Walk-style triangle with prescribed angles."""
    cov, _, _ = realize_triangle(angles)
    return triangle_of(cov)


def realize_triangle(angles):
    """Covariance and an eight-atom step distribution with the given triangle angles.

    Returns ``(cov, atoms, weights)``: the atoms are ``L (u, v, w)`` for
    ``u, v, w`` in ``{-1, 1}``, each with weight ``1/8``.
    """
    angles = tuple(float(t) for t in angles)
    if len(angles) != 3 or any(not 0.0 < t < np.pi for t in angles):
        raise NotRealizable(f"angles must lie strictly between 0 and pi, got {angles}")
    a, b, c = (-np.cos(t) for t in angles)
    if covariance_det(a, b, c) <= DET_TOL:
        raise NotRealizable(f"cosine matrix for angles {angles} is not positive definite")
    cov = covariance_from_correlations(float(a), float(b), float(c))
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
    atoms = signs @ cov.cholesky_L.T
    weights = np.full(8, 1.0 / 8.0)
    return cov, atoms, weights
