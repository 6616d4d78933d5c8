"""The group of a 3D step set and probes of its order and orbit sum.

Each generator replaces one coordinate ``x`` by ``(1/x) A_-(y, z) / A_+(y, z)``
where ``A_-`` and ``A_+`` collect the steps with ``dx = -1`` and ``dx = +1``.
Group elements are identified by their images of a few random rational
points.  The breadth-first search runs on residues modulo a prime, because
rational heights grow exponentially along words of an infinite group;
every ``Finite`` verdict is then re-derived in exact rational arithmetic.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    EvaluationSingularity,
    GroupPrecondition,
    MissingNegativeStep,
    MissingPositiveStep,
    StepSetError,
)
from .stepset import StepSet

PRIME = 2**61 - 1  # Mersenne prime; BFS keys are residues of the sample images
N_POINTS = 5
MAX_RETRIES = 10
WORD_BOUND = 10**5
STATE_CAP = 10**6
NAMES = ("phi", "psi", "tau")


@dataclass(frozen=True)
class RationalInvolution:
    """``x_axis -> (1/x_axis) * minus / plus`` with sections in the other two variables.

    ``minus`` and ``plus`` map exponent pairs of the remaining axes (in
    increasing axis order) to rational coefficients.
    """

    axis: int
    minus: dict = field(hash=False)
    plus: dict = field(hash=False)

    @property
    def others(self) -> tuple[int, int]:
        return tuple(i for i in range(3) if i != self.axis)

    def _sections_exact(self, p):
        u, v = (p[i] for i in self.others)
        ev = lambda sec: sum((c * u**i * v**j for (i, j), c in sec.items()), Fraction(0))
        return ev(self.minus), ev(self.plus)

    def __call__(self, point):
        """Exact image of a point with rational coordinates."""
        p = tuple(Fraction(c) for c in point)
        num, den = self._sections_exact(p)
        if den == 0 or num == 0 or p[self.axis] == 0:
            raise EvaluationSingularity(f"{NAMES[self.axis]} is singular at {point}")
        out = list(p)
        out[self.axis] = num / (den * p[self.axis])
        return tuple(out)

    def mod_form(self):
        """Sections times ``u v`` as ``[(i, j, coef mod PRIME)]`` with ``i, j`` in ``{0, 1, 2}``."""
        conv = lambda sec: [
            (i + 1, j + 1, c.numerator % PRIME * pow(c.denominator, -1, PRIME) % PRIME)
            for (i, j), c in sec.items()
        ]
        return conv(self.minus), conv(self.plus)

    def apply_mod(self, state: tuple[int, ...]) -> tuple[int, ...]:
        """Image of a flat tuple of residue points ``(x0, y0, z0, x1, ...)``."""
        return _apply_mod(self.axis, self.others, *self.mod_form(), state)


def _apply_mod(axis, others, minus, plus, state):
    out = list(state)
    a, b = others
    for k in range(0, len(state), 3):
        u, v = state[k + a], state[k + b]
        up = (1, u, u * u % PRIME)
        vp = (1, v, v * v % PRIME)
        num = sum(c * up[i] * vp[j] for i, j, c in minus) % PRIME
        den = sum(c * up[i] * vp[j] for i, j, c in plus) * state[k + axis] % PRIME
        if num == 0 or den == 0:
            raise EvaluationSingularity(f"{NAMES[axis]} is singular at a sample point")
        out[k + axis] = num * pow(den, -1, PRIME) % PRIME
    return tuple(out)


def generators(s: StepSet) -> tuple[RationalInvolution, RationalInvolution, RationalInvolution]:
    """The three involutions ``phi, psi, tau`` of a step set with steps in ``{-1,0,1}^3``."""
    if s.max_step() > 1:
        raise StepSetError("the group is defined for small steps only")
    gens = []
    for axis in range(3):
        others = tuple(i for i in range(3) if i != axis)
        minus, plus = {}, {}
        for st in s:
            vec = st.vector
            key = tuple(vec[i] for i in others)
            if vec[axis] == -1:
                minus[key] = minus.get(key, 0) + st.weight
            elif vec[axis] == 1:
                plus[key] = plus.get(key, 0) + st.weight
        if not plus:
            raise MissingPositiveStep(f"no step with positive {'xyz'[axis]} coordinate")
        if not minus:
            raise MissingNegativeStep(f"no step with negative {'xyz'[axis]} coordinate")
        gens.append(RationalInvolution(axis, minus, plus))
    return tuple(gens)


# -- sample points -------------------------------------------------------------


def sample_points(rng: random.Random, n: int = N_POINTS) -> list[tuple[Fraction, ...]]:
    """Rational points with coprime numerators/denominators in [2, 97], distinct coordinates."""
    pts = []
    while len(pts) < n:
        coords: list[Fraction] = []
        while len(coords) < 3:
            p, q = rng.randint(2, 97), rng.randint(2, 97)
            if math.gcd(p, q) != 1:
                continue
            f = Fraction(p, q)
            if f not in coords:
                coords.append(f)
        pts.append(tuple(coords))
    return pts


def _to_residues(points) -> tuple[int, ...]:
    return tuple(c.numerator * pow(c.denominator, -1, PRIME) % PRIME for p in points for c in p)


# -- order probe -------------------------------------------------------------------


@dataclass(frozen=True)
class GroupProbeResult:
    verdict: str  # "Finite" or "NoFiniteOrderUpTo"
    order: int | None
    bound: int | None
    elements_discovered: int
    certificate: tuple
    sign_consistent: bool = True

    @property
    def finite(self) -> bool:
        return self.verdict == "Finite"

    def __str__(self) -> str:
        return f"Finite({self.order})" if self.finite else f"NoFiniteOrderUpTo({self.bound})"


def _bfs_mod(gens, base: tuple[int, ...], word_bound: int, state_cap: int):
    """Closure of the orbit of the sample points, on residues."""
    forms = [(g.axis, g.others) + g.mod_form() for g in gens]
    seen = {base: 0}
    frontier = [base]
    parity_ok = True
    evaluations = 0
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for state in frontier:
            for form in forms:
                img = _apply_mod(*form, state)
                evaluations += 1
                par = seen.get(img)
                if par is None:
                    seen[img] = depth % 2
                    nxt.append(img)
                elif par != depth % 2:
                    parity_ok = False
        if len(seen) > word_bound or evaluations > state_cap:
            return None, len(seen), parity_ok
        frontier = nxt
    return len(seen), len(seen), parity_ok


def exact_closure(gens, points, cap: int):
    """Exact BFS over images of ``points``; returns ``{state: parity}`` or ``None`` past ``cap``."""
    start = tuple(tuple(p) for p in points)
    seen = {start: 0}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for g in gens:
            img = tuple(g(p) for p in state)
            if img not in seen:
                seen[img] = 1 - seen[state]
                if len(seen) > cap:
                    return None
                queue.append(img)
    return seen


def _signs_consistent(gens, closure) -> bool:
    return all(
        closure[tuple(g(p) for p in state)] != par for state, par in closure.items() for g in gens
    )


def group_order_probe(
    gens,
    word_bound: int = WORD_BOUND,
    state_cap: int = STATE_CAP,
    seed: int = 0,
) -> GroupProbeResult:
    """Bounded search for the order of the group generated by ``gens``."""
    rng = random.Random(seed)
    for _ in range(MAX_RETRIES):
        points = sample_points(rng)
        try:
            order, found, parity_ok = _bfs_mod(gens, _to_residues(points), word_bound, state_cap)
            if order is None:
                return GroupProbeResult("NoFiniteOrderUpTo", None, word_bound, found, tuple(points))
            closure = exact_closure(gens, points, order)
        except EvaluationSingularity:
            continue
        if closure is None or len(closure) != order:
            raise GroupPrecondition("modular and exact closures disagree")
        consistent = parity_ok and _signs_consistent(gens, closure)
        return GroupProbeResult("Finite", order, None, order, tuple(points), consistent)
    raise EvaluationSingularity(f"sample points hit a singularity {MAX_RETRIES} times")


def pair_order(g, h, bound: int = 1000, seed: int = 0) -> int | None:
    """Order of ``g o h``, or ``None`` when it exceeds ``bound``."""
    rng = random.Random(seed)
    for _ in range(MAX_RETRIES):
        points = sample_points(rng)
        base = _to_residues(points)
        try:
            cur = base
            found = None
            for m in range(1, bound + 1):
                cur = g.apply_mod(h.apply_mod(cur))
                if cur == base:
                    found = m
                    break
            if found is None:
                return None
            exact = list(points)
            for _ in range(found):
                exact = [g(h(p)) for p in exact]
        except EvaluationSingularity:
            continue
        if exact != list(points):
            raise GroupPrecondition("modular order not confirmed in exact arithmetic")
        return found
    raise EvaluationSingularity(f"sample points hit a singularity {MAX_RETRIES} times")


@dataclass(frozen=True)
class OrbitSum:
    zero: bool
    witness: tuple | None
    values: tuple


def orbit_sum_probe(gens, seed: int = 0, probe: GroupProbeResult | None = None) -> OrbitSum:
    """Signed orbit sum of ``x y z`` evaluated exactly at random rational points."""
    probe = probe or group_order_probe(gens, seed=seed)
    if not probe.finite:
        raise GroupPrecondition("orbit sum needs a finite group")
    if not probe.sign_consistent:
        raise GroupPrecondition("word-length parity is not a well-defined sign on this group")
    rng = random.Random(seed + 1)
    for _ in range(MAX_RETRIES):
        points = sample_points(rng)
        try:
            closure = exact_closure(gens, points, probe.order)
        except EvaluationSingularity:
            continue
        values = []
        for i, p in enumerate(points):
            total = Fraction(0)
            for state, par in closure.items():
                x, y, z = state[i]
                total += (-1) ** par * x * y * z
            values.append(total)
        nonzero = next((p for p, v in zip(points, values) if v != 0), None)
        return OrbitSum(zero=nonzero is None, witness=nonzero, values=tuple(values))
    raise EvaluationSingularity(f"sample points hit a singularity {MAX_RETRIES} times")
