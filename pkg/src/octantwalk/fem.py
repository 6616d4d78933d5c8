"""P1 finite elements for the Dirichlet Laplace-Beltrami problem on a spherical triangle.

The triangle is meshed by recursive midpoint refinement with projection onto
the sphere, elements are flat, and the smallest eigenvalue of ``K u = lambda M u``
is found by inverse power iteration.  A Wynn epsilon table accelerates the
sequence of eigenvalues obtained on successive refinement levels.
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import (
    DegenerateElement,
    InsufficientData,
    InsufficientTerms,
    IterationCap,
    MeshError,
    NoInteriorVertices,
)

log = logging.getLogger(__name__)

MAX_LEVEL = 12
DEFAULT_LEVELS = (3, 8)
# Eigenvalue runs start from the six-triangle split: at equal level it has
# 6x the elements and a much smaller error constant near obtuse corners.
EIGEN_INITIAL = "barycentric"


@dataclass(frozen=True)
class SurfaceMesh:
    """Refined triangulation of a spherical triangle.

    Attributes
    ----------
    vertices : ndarray, shape (n, 3)
        Unit vectors on the sphere.
    triangles : ndarray, shape (4**level, 3) or (6 * 4**level, 3)
        Vertex indices, oriented like the input triangle.
    boundary : ndarray of bool, shape (n,)
        True for vertices lying on a side of the spherical triangle.
    lattice : ndarray, shape (n, 2)
        Integer barycentric lattice coordinates of each vertex.
    level : int
        Number of refinements.
    initial : str
        ``"single"`` or ``"barycentric"`` starting triangulation.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    lattice: np.ndarray
    level: int
    initial: str = "single"

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def flat_area(self) -> float:
        p0, p1, p2 = (self.vertices[self.triangles[:, i]] for i in range(3))
        return 0.5 * float(np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1).sum())


@dataclass
class EigResult:
    lam: float
    eigenvector: np.ndarray
    level: int
    iterations: int
    interior: np.ndarray | None = None


def _corner_vectors(t) -> np.ndarray:
    verts = getattr(t, "vertices", t)
    verts = np.asarray(verts, dtype=float)
    if verts.shape != (3, 3):
        raise MeshError("a spherical triangle needs three 3-vectors")
    verts = verts / np.linalg.norm(verts, axis=1)[:, None]
    if abs(np.linalg.det(verts)) < 1e-14:
        raise MeshError("triangle vertices are linearly dependent")
    return verts


def _initial_mesh(corners: np.ndarray, initial: str, k: int):
    """Starting vertices, lattice keys and triangles before any refinement."""
    if initial == "single":
        n = 2**k
        lat = np.array([[0, 0], [n, 0], [0, n]], dtype=np.int64)
        return corners.copy(), lat, np.array([[0, 1, 2]], dtype=np.int64), n
    if initial == "barycentric":
        # centroid plus side midpoints, six triangles around the centroid
        n = 6 * 2**k
        a, b, c = corners
        extra = np.array([a + b, b + c, c + a, a + b + c])
        extra /= np.linalg.norm(extra, axis=1)[:, None]
        pos = np.vstack([corners, extra])
        lat = np.array(
            [[0, 0], [n, 0], [0, n], [n // 2, 0], [n // 2, n // 2], [0, n // 2], [n // 3, n // 3]],
            dtype=np.int64,
        )
        tris = np.array(
            [[0, 3, 6], [3, 1, 6], [1, 4, 6], [4, 2, 6], [2, 5, 6], [5, 0, 6]], dtype=np.int64
        )
        return pos, lat, tris, n
    raise MeshError(f"unknown initial triangulation {initial!r}")


def triangulate(t, k: int, initial: str = "single") -> SurfaceMesh:
    """Midpoint-refine a spherical triangle ``k`` times.

    ``initial="single"`` starts from the triangle itself (``4**k`` elements);
    ``initial="barycentric"`` starts from its six-triangle split around the
    centroid (``6 * 4**k`` elements).  Shared midpoints are identified
    through their exact position on an integer barycentric lattice, so no
    floating point keys are involved.  Every new vertex is the normalized
    sum of the two endpoints of the edge it splits.
    """
    if not 0 <= k <= MAX_LEVEL:
        raise MeshError(f"refinement level must lie in [0, {MAX_LEVEL}], got {k}")
    corners = _corner_vectors(t)
    pos, lat, tris, n = _initial_mesh(corners, initial, k)

    for _ in range(k):
        a = tris[:, [0, 1, 2]].T.ravel()
        b = tris[:, [1, 2, 0]].T.ravel()
        mid = (lat[a] + lat[b]) // 2
        keys = mid[:, 0] * (n + 1) + mid[:, 1]
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        p = pos[a[first]] + pos[b[first]]
        p /= np.linalg.norm(p, axis=1)[:, None]
        base = len(pos)
        pos = np.vstack([pos, p])
        lat = np.vstack([lat, mid[first]])
        m_ab, m_bc, m_ca = (base + inverse).reshape(3, -1)
        x, y, z = tris[:, 0], tris[:, 1], tris[:, 2]
        tris = np.concatenate(
            [
                np.stack([x, m_ab, m_ca], axis=1),
                np.stack([m_ab, y, m_bc], axis=1),
                np.stack([m_ca, m_bc, z], axis=1),
                np.stack([m_ab, m_bc, m_ca], axis=1),
            ]
        )

    i, j = lat[:, 0], lat[:, 1]
    boundary = (i == 0) | (j == 0) | (i + j == n)
    return SurfaceMesh(
        vertices=pos, triangles=tris, boundary=boundary, lattice=lat, level=k, initial=initial
    )


def assemble(m: SurfaceMesh) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Assemble the P1 stiffness and mass matrices on the flat elements.

    Returns symmetric CSR matrices ``(K, M)`` of size ``n_vertices``.
    """
    tris = m.triangles
    p0, p1, p2 = (m.vertices[tris[:, i]] for i in range(3))
    # edge opposite each local vertex
    edges = np.stack([p2 - p1, p0 - p2, p1 - p0], axis=1)
    area = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)
    if np.any(area <= 1e-300):
        raise DegenerateElement("mesh contains a zero-area element")

    local_k = np.einsum("tid,tjd->tij", edges, edges) / (4.0 * area)[:, None, None]
    local_m = (area / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))[None]

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = m.n_vertices
    stiffness = sparse.coo_matrix((local_k.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mass = sparse.coo_matrix((local_m.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # exact symmetry regardless of summation order
    stiffness = ((stiffness + stiffness.T) * 0.5).tocsr()
    mass = ((mass + mass.T) * 0.5).tocsr()
    return stiffness, mass


def _preconditioner(a: sparse.csr_matrix):
    if a.shape[0] < 2000:
        inv_diag = 1.0 / a.diagonal()
        return lambda r: inv_diag * r
    import pyamg

    ml = pyamg.smoothed_aggregation_solver(a, symmetry="symmetric", max_coarse=500)
    apply = ml.aspreconditioner(cycle="V")
    return lambda r: apply @ r


def pcg(a, b, x0, precond, rtol=1e-12, maxiter=5000):
    """Preconditioned conjugate gradients for a symmetric positive definite ``a``."""
    x = x0.copy()
    r = b - a @ x
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    z = precond(r)
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        if np.linalg.norm(r) <= rtol * bnorm:
            return x, it - 1
        ap = a @ p
        alpha = rz / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        z = precond(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter


def smallest_eigenpair(
    stiffness,
    mass,
    boundary,
    *,
    rtol: float = 1e-13,
    max_iter: int = 10_000,
    level: int = -1,
) -> EigResult:
    """Smallest Dirichlet eigenpair by inverse power iteration.

    Boundary degrees of freedom are eliminated, each step solves
    ``K z = M u`` with preconditioned CG, and iteration stops once two
    successive Rayleigh quotients agree to ``rtol`` relative.
    """
    interior = ~np.asarray(boundary, dtype=bool)
    if not interior.any():
        raise NoInteriorVertices("mesh has no interior vertex; refine at least once more")
    idx = np.flatnonzero(interior)
    k = sparse.csr_matrix(stiffness)[idx][:, idx].tocsr()
    m = sparse.csr_matrix(mass)[idx][:, idx].tocsr()
    precond = _preconditioner(k)

    u = np.ones(len(idx))
    u /= np.sqrt(u @ (m @ u))
    lam = float(u @ (k @ u))
    for it in range(1, max_iter + 1):
        z, _ = pcg(k, m @ u, u / lam, precond, rtol=1e-12)
        mz = m @ z
        z /= np.sqrt(z @ mz)
        lam_new = float(z @ (k @ z))
        u = z
        if abs(lam_new - lam) <= rtol * lam_new:
            return EigResult(lam=lam_new, eigenvector=u, level=level, iterations=it, interior=idx)
        lam = lam_new
    raise IterationCap(f"inverse iteration did not settle within {max_iter} steps")


def mesh_eigenvalue(t, k: int, initial: str = EIGEN_INITIAL) -> EigResult:
    """Smallest eigenpair on the level-``k`` mesh of ``t``."""
    mesh = triangulate(t, k, initial)
    stiffness, mass = assemble(mesh)
    return smallest_eigenpair(stiffness, mass, mesh.boundary, level=k)


def eigenvalue_sequence(
    t,
    kmin: int = DEFAULT_LEVELS[0],
    kmax: int = DEFAULT_LEVELS[1],
    initial: str = EIGEN_INITIAL,
) -> list[tuple[int, float]]:
    """Eigenvalue on independent meshes for every level in ``[kmin, kmax]``."""
    if kmin < 2 or kmax > MAX_LEVEL or kmin > kmax:
        raise MeshError(f"need 2 <= kmin <= kmax <= {MAX_LEVEL}, got {kmin}:{kmax}")
    out = []
    for k in range(kmin, kmax + 1):
        res = mesh_eigenvalue(t, k, initial)
        log.debug("level %d: lambda=%.15g (%d iterations)", k, res.lam, res.iterations)
        out.append((k, res.lam))
    return out


def wynn_table(seq) -> list[list[float | None]]:
    """Columns ``eps_k^(n)`` of the Wynn epsilon table, ``k = 0, 1, ...``.

    ``None`` stands for an infinite entry (vanishing denominator).  Its
    reciprocal difference is zero, so the next column simply carries the
    neighbouring entry of the column before forward.
    """
    prev: list[float | None] = [0.0] * (len(seq) + 1)
    cur: list[float | None] = [float(v) for v in seq]
    cols = [cur]
    while len(cur) > 1:
        nxt: list[float | None] = []
        for n in range(len(cur) - 1):
            lo, hi, base = cur[n], cur[n + 1], prev[n + 1]
            if lo is None or hi is None:
                nxt.append(base)
            elif abs(hi - lo) < 1e-300 or base is None:
                nxt.append(None)
            else:
                nxt.append(base + 1.0 / (hi - lo))
        prev, cur = cur, nxt
        cols.append(cur)
    return cols


def wynn_extrapolate(seq) -> float:
    """Limit estimate ``eps_{2n}^(0)`` from the largest usable even column."""
    seq = list(seq)
    if len(seq) < 3:
        raise InsufficientTerms("Wynn extrapolation needs at least three terms")
    cols = wynn_table(seq)
    for k in range(len(cols) - 1, -1, -1):
        if k % 2 == 0 and cols[k] and cols[k][0] is not None:
            return float(cols[k][0])
    return float(seq[-1])


def convergence_order(seq, reference: float) -> float:
    """Least-squares slope of ``log|lambda_k - reference|`` against ``log 2**-k``.

    ``seq`` holds ``(level, value)`` pairs; exact hits on the reference are dropped.
    """
    pts = [(k, v) for k, v in seq if v != reference]
    if len(pts) < 2:
        raise InsufficientData("need at least two levels with nonzero error")
    x = np.array([-k * np.log(2.0) for k, _ in pts])
    y = np.log(np.abs(np.array([v for _, v in pts]) - reference))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def export_mesh(m: SurfaceMesh, destination=None) -> bytes:
    """Write ``m`` in OFF format; ``destination`` may be a path or a binary stream."""
    buf = io.StringIO()
    buf.write("OFF\n")
    buf.write(f"{m.n_vertices} {m.n_triangles} 0\n")
    for v in m.vertices:
        buf.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
    for t in m.triangles:
        buf.write(f"3 {t[0]} {t[1]} {t[2]}\n")
    data = buf.getvalue().encode("ascii")
    if destination is None:
        return data
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    else:
        destination.write(data)
    return data


def read_off(source) -> tuple[np.ndarray, np.ndarray]:
    """Parse an OFF file written by :func:`export_mesh`."""
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("ascii")
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="ascii") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("ascii")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if lines[0].strip() != "OFF":
        raise MeshError("missing OFF header")
    nv, nf, _ = (int(v) for v in lines[1].split())
    verts = np.array([[float(x) for x in ln.split()] for ln in lines[2 : 2 + nv]])
    faces = []
    for ln in lines[2 + nv : 2 + nv + nf]:
        parts = [int(x) for x in ln.split()]
        if parts[0] != 3:
            raise MeshError("only triangular faces are supported")
        faces.append(parts[1:])
    return verts.reshape(nv, 3), np.array(faces, dtype=np.int64).reshape(nf, 3)
