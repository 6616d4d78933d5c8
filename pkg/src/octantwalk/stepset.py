"""Step sets in Z^3: parsing, inventory polynomial and structural tests.

Cross-section strings list 26 binary flags.  They are read in three layers
z = -1, 0, +1, each layer in rows y = -1, 0, +1, each row in columns
x = -1, 0, +1; the origin cell is absent from the middle layer.  Whitespace
is ignored, so ``"000 010 000 010 11 010 000 010 000"`` is the simple walk.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import StepSetError
from .exactlp import feasible_point

AXES = "xyz"

# (dx, dy, dz) for each of the 26 cross-section positions
CELLS: tuple[tuple[int, int, int], ...] = tuple(
    (dx, dy, dz)
    for dz in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dx in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
)


@dataclass(frozen=True)
class Step:
    dx: int
    dy: int
    dz: int
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        if (self.dx, self.dy, self.dz) == (0, 0, 0):
            raise StepSetError("the zero step is not allowed")
        w = Fraction(self.weight)
        if w <= 0:
            raise StepSetError(f"step weight must be positive, got {w}")
        object.__setattr__(self, "weight", w)

    @property
    def vector(self) -> tuple[int, int, int]:
        return (self.dx, self.dy, self.dz)


@dataclass(frozen=True)
class StepSet:
    """Non-empty ordered collection of steps with distinct displacements."""

    steps: tuple[Step, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise StepSetError("empty step set")
        seen = set()
        for s in steps:
            if s.vector in seen:
                raise StepSetError(f"duplicate step {s.vector}")
            seen.add(s.vector)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_vectors(cls, vectors: Iterable[Sequence[int]], weights=None) -> "StepSet":
        vectors = [tuple(int(c) for c in v) for v in vectors]
        if weights is None:
            weights = [1] * len(vectors)
        return cls(tuple(Step(*v, weight=Fraction(w)) for v, w in zip(vectors, weights)))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def vectors(self) -> list[tuple[int, int, int]]:
        return [s.vector for s in self.steps]

    @property
    def weights(self) -> list[Fraction]:
        return [s.weight for s in self.steps]

    @property
    def unweighted(self) -> bool:
        return all(s.weight == 1 for s in self.steps)

    def max_step(self) -> int:
        return max(max(abs(c) for c in v) for v in self.vectors)

    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def to_cross_section(self) -> str:
        """Cross-section string, grouped by layer rows.  Only for small unit-weight sets."""
        if not self.unweighted or self.max_step() > 1:
            raise StepSetError("only unit-weight steps in {-1,0,1}^3 have a cross-section form")
        present = set(self.vectors)
        flags = "".join("1" if c in present else "0" for c in CELLS)
        groups = [flags[0:3], flags[3:6], flags[6:9], flags[9:12], flags[12:14],
                  flags[14:17], flags[17:20], flags[20:23], flags[23:26]]
        return " ".join(groups)

    def to_json(self) -> str:
        return json.dumps(
            {
                "steps": [
                    {"dx": s.dx, "dy": s.dy, "dz": s.dz, "weight": str(s.weight)}
                    for s in self.steps
                ]
            }
        )

    def format(self) -> str:
        """Cross-section string when possible, JSON otherwise."""
        try:
            return self.to_cross_section()
        except StepSetError:
            return self.to_json()


def parse_steps(text: str) -> StepSet:
    """Parse a cross-section string or a JSON weighted step list."""
    if not isinstance(text, str):
        raise StepSetError("step specification must be a string")
    body = text.strip()
    if body.startswith("{"):
        return _parse_json(body)
    flags = "".join(body.split())
    if len(flags) != len(CELLS):
        raise StepSetError(f"cross-section string needs {len(CELLS)} flags, got {len(flags)}")
    if set(flags) - {"0", "1"}:
        raise StepSetError("cross-section string may only contain 0 and 1")
    vectors = [c for c, f in zip(CELLS, flags) if f == "1"]
    return StepSet.from_vectors(vectors)


def _parse_json(body: str) -> StepSet:
    try:
        data = json.loads(body)
        entries = data["steps"]
        steps = []
        for e in entries:
            vec = [e["dx"], e["dy"], e["dz"]]
            if any(isinstance(v, bool) or not isinstance(v, int) for v in vec):
                raise StepSetError(f"step coordinates must be integers: {e}")
            steps.append(Step(*vec, weight=Fraction(str(e.get("weight", "1")))))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, StepSetError):
            raise
        raise StepSetError(f"malformed JSON step list: {exc}") from exc
    return StepSet(tuple(steps))


# -- inventory -------------------------------------------------------------


@dataclass(frozen=True)
class Inventory:
    """Laurent polynomial ``chi = sum_s w_s x^s``, kept as exponent -> coefficient."""

    terms: dict = field(hash=False)

    @classmethod
    def of(cls, s: StepSet) -> "Inventory":
        return cls({st.vector: st.weight for st in s})

    @property
    def exponents(self) -> np.ndarray:
        return np.array(list(self.terms), dtype=float).reshape(-1, 3)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([float(w) for w in self.terms.values()])

    def bounds(self) -> list[tuple[int, int]]:
        """``(min, max)`` exponent along each axis."""
        e = list(self.terms)
        return [(min(v[i] for v in e), max(v[i] for v in e)) for i in range(3)]

    def __call__(self, point) -> float:
        p = np.asarray(point, dtype=float)
        return float(self.coefficients @ np.prod(p[None, :] ** self.exponents, axis=1))

    def exact(self, point) -> Fraction:
        total = Fraction(0)
        for (i, j, k), w in self.terms.items():
            total += w * Fraction(point[0]) ** i * Fraction(point[1]) ** j * Fraction(point[2]) ** k
        return total

    def drift(self) -> tuple[Fraction, Fraction, Fraction]:
        """Exact gradient of ``chi`` at ``(1, 1, 1)``, i.e. the weighted step sum."""
        return tuple(sum((w * e[i] for e, w in self.terms.items()), Fraction(0)) for i in range(3))


def inventory(s: StepSet) -> Inventory:
    return Inventory.of(s)


# -- half-space test -------------------------------------------------------


@dataclass(frozen=True)
class HalfSpaceVerdict:
    contained: bool
    witness_normal: tuple[int, ...] | None = None


def _primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = math.gcd(*(abs(int(c)) for c in v))
    return tuple(int(c) // g for c in v) if g else tuple(int(c) for c in v)


def _int_rank(vectors: list[tuple[int, ...]]) -> int:
    if not vectors:
        return 0
    return int(np.linalg.matrix_rank(np.array(vectors, dtype=float)))


def _kernel_vector(vectors: list[tuple[int, ...]], dim: int) -> tuple[int, ...]:
    """Nonzero integer vector orthogonal to all ``vectors`` (rank < dim assumed)."""
    rows = [[Fraction(c) for c in v] for v in vectors]
    pivots: list[int] = []
    r = 0
    for col in range(dim):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rows[r] = [v / rows[r][col] for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    free = next(c for c in range(dim) if c not in pivots)
    v = [Fraction(0)] * dim
    v[free] = Fraction(1)
    for i, col in enumerate(pivots):
        v[col] = -rows[i][free]
    den = math.lcm(*(c.denominator for c in v))
    return _primitive([int(c * den) for c in v])


def _pair_normals(vectors: list[tuple[int, ...]], dim: int):
    """Candidate extreme normals: orthogonal complements of (dim-1)-subsets."""
    for combo in itertools.combinations(vectors, dim - 1):
        if _int_rank(list(combo)) < dim - 1:
            continue
        n = _kernel_vector(list(combo), dim)
        yield n
        yield tuple(-c for c in n)


def halfspace_witness(vectors: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """Integer normal ``u != 0`` with ``<u, s> >= 0`` for every vector, or ``None``.

    Works in any dimension.  Decided exactly: when the vectors do not span the
    space a normal of their span works; otherwise the cone of valid normals is
    pointed and its extreme rays are orthogonal to ``dim - 1`` independent
    vectors, so testing those finitely many candidates is complete.
    """
    vecs = [tuple(int(c) for c in v) for v in vectors]
    dim = len(vecs[0])
    uniq = sorted(set(vecs))
    if _int_rank(uniq) < dim:
        return _kernel_vector(uniq, dim)
    total = [0] * dim
    found = False
    for n in set(_pair_normals(uniq, dim)):
        if all(sum(a * b for a, b in zip(n, v)) >= 0 for v in uniq):
            total = [t + c for t, c in zip(total, n)]
            found = True
    return _primitive(total) if found else None


def half_space_check(s: StepSet) -> HalfSpaceVerdict:
    """Whether all steps lie in a closed half-space through the origin."""
    w = halfspace_witness(s.vectors)
    return HalfSpaceVerdict(contained=w is not None, witness_normal=w)


# -- dimensionality --------------------------------------------------------


def implied(vectors: Sequence[Sequence[int]], given: Sequence[int], target: int) -> bool:
    """Whether the ``given`` coordinate-sum inequalities imply the ``target`` one.

    The inequalities are ``sum_s a_s s_i >= 0`` over multiplicities ``a >= 0``.
    The target is implied iff no ``a >= 0`` meets the given ones while
    ``sum_s a_s s_target = -1``.
    """
    rows, rhs = [], []
    for j, i in enumerate(given):
        # sum a s_i - slack_j = 0
        rows.append([v[i] for v in vectors] + [-int(j == jj) for jj in range(len(given))])
        rhs.append(0)
    rows.append([v[target] for v in vectors] + [0] * len(given))
    rhs.append(-1)
    return feasible_point(rows, rhs) is None


@dataclass(frozen=True)
class Dimensionality:
    dim: int
    witness: tuple[int, ...]


def dimensionality(s: StepSet) -> Dimensionality:
    """Smallest number of coordinate inequalities implying the remaining ones."""
    vecs = s.vectors
    for d in range(4):
        for given in itertools.combinations(range(3), d):
            rest = [i for i in range(3) if i not in given]
            if all(implied(vecs, given, i) for i in rest):
                return Dimensionality(d, given)
    raise AssertionError("the three inequalities always imply themselves")


# -- Hadamard decomposition ------------------------------------------------


@dataclass(frozen=True)
class HadamardForm:
    """``chi = U + V T`` with U, V in the ``outer`` axes and T in the ``inner`` axes.

    Polynomials are dicts from full exponent triples to rational coefficients.
    """

    kind: str
    outer: tuple[int, ...]
    inner: tuple[int, ...]
    U: dict
    V: dict
    T: dict

    @property
    def permutation(self) -> tuple[int, ...]:
        return self.outer + self.inner

    def recombine(self) -> dict:
        out: dict = {}
        for e, c in self.U.items():
            out[e] = out.get(e, 0) + c
        for ev, cv in self.V.items():
            for et, ct in self.T.items():
                e = tuple(a + b for a, b in zip(ev, et))
                out[e] = out.get(e, 0) + cv * ct
        return {e: c for e, c in out.items() if c != 0}

    def describe(self) -> str:
        names = lambda ax: "".join(AXES[i] for i in ax)
        return f"{self.kind}: U({names(self.outer)}) + V({names(self.outer)}) T({names(self.inner)})"


@dataclass(frozen=True)
class HadamardDecomposition:
    kind: str
    forms: tuple[HadamardForm, ...] = ()

    @property
    def permutation(self) -> tuple[int, ...] | None:
        return self.forms[0].permutation if self.forms else None


def _split(terms: dict, outer: tuple[int, ...], inner: tuple[int, ...]) -> HadamardForm | None:
    groups: dict = {}
    for e, c in terms.items():
        key = tuple(e[i] if i in outer else 0 for i in range(3))
        rest = tuple(e[i] if i in inner else 0 for i in range(3))
        groups.setdefault(key, {})[rest] = c
    zero = (0, 0, 0)
    U: dict = {}
    V: dict = {}
    T: dict | None = None
    for key in sorted(groups):
        f = groups[key]
        if zero in f:
            U[key] = f[zero]
        g = {e: c for e, c in f.items() if e != zero}
        if not g:
            continue
        if T is None:
            lead = g[min(g)]
            T = {e: c / lead for e, c in g.items()}
        ratio = g.get(min(T))
        if ratio is None or set(g) != set(T) or any(g[e] != ratio * T[e] for e in T):
            return None
        V[key] = ratio
    if T is None:
        return None
    kind = "Type12" if len(outer) == 1 else "Type21"
    return HadamardForm(kind, outer, inner, U, V, T)


def hadamard_decompose(s: StepSet) -> HadamardDecomposition:
    """All Hadamard forms of ``chi`` over the six axis partitions."""
    terms = dict(Inventory.of(s).terms)
    forms = []
    for outer_size in (1, 2):
        for outer in itertools.combinations(range(3), outer_size):
            inner = tuple(i for i in range(3) if i not in outer)
            form = _split(terms, outer, inner)
            if form is not None:
                forms.append(form)
    kinds = {f.kind for f in forms}
    if not kinds:
        kind = "None"
    elif len(kinds) == 2:
        kind = "Both"
    else:
        kind = kinds.pop()
    return HadamardDecomposition(kind, tuple(forms))
