"""End-to-end analysis of a step set and its serializable report."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources

from . import critical, fem, group, spectra
from .errors import HalfSpacePrecondition, PreconditionError, UnsupportedTriple
from .stepset import (
    StepSet,
    dimensionality,
    hadamard_decompose,
    half_space_check,
    inventory,
    parse_steps,
)

SCHEMA_VERSION = "1.0"
RIGHT_ANGLE_TOL = 1e-10
TILING_TOL = 1e-10

METHOD_BIRECTANGULAR = "ClosedFormBirectangular"
METHOD_TILING = "Tiling"
METHOD_FEM = "FEM+Wynn"


@dataclass
class EigenEstimate:
    lambda1: float
    method: str
    sequence: list = field(default_factory=list)
    levels: list | None = None


def _tiling_triple(angles) -> tuple[int, int, int] | None:
    triple = []
    for a in angles:
        r = math.pi / a
        k = round(r)
        if k < 2 or abs(r - k) > TILING_TOL * max(1.0, r):
            return None
        triple.append(k)
    return tuple(triple)


def principal_eigenvalue(
    angles, *, force_fem: bool = False, levels=fem.DEFAULT_LEVELS, triangle=None
) -> EigenEstimate:
    """Smallest Dirichlet eigenvalue of the triangle with the given angles.

    Closed forms are used whenever they apply unless ``force_fem`` is set:
    two right angles give the birectangular formula, angles ``pi/p, pi/q,
    pi/r`` of a tiling triangle give its lattice spectrum.  Otherwise the
    FEM sequence over ``levels`` is extrapolated with Wynn's algorithm.
    """
    angles = tuple(float(a) for a in angles)
    if not force_fem:
        right = [i for i, a in enumerate(angles) if abs(a - math.pi / 2) <= RIGHT_ANGLE_TOL]
        if len(right) >= 2:
            rest = [a for i, a in enumerate(angles) if i not in right[:2]]
            return EigenEstimate(spectra.birectangular_lambda1(rest[0]), METHOD_BIRECTANGULAR)
        triple = _tiling_triple(angles)
        if triple is not None:
            try:
                return EigenEstimate(float(spectra.tiling_eigenvalues(*triple)[0]), METHOD_TILING)
            except UnsupportedTriple:
                pass
    tri = triangle if triangle is not None else critical.triangle_from_angles(angles)
    kmin, kmax = levels
    seq = fem.eigenvalue_sequence(tri, kmin, kmax)
    values = [v for _, v in seq]
    lam = fem.wynn_extrapolate(values) if len(values) >= 3 else values[-1]
    return EigenEstimate(lam, METHOD_FEM, [[k, v] for k, v in seq], [kmin, kmax])


@dataclass
class AnalysisReport:
    """Everything computed for one step set; plain data, JSON round-trippable."""

    spec: str
    steps: list
    half_space: dict
    dimension: dict
    hadamard: dict
    critical: dict | None = None
    correlations: dict | None = None
    triangle: dict | None = None
    eigenvalue: dict | None = None
    exponent: float | None = None
    total_walks: dict | None = None
    group: dict | None = None
    timings: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def load_schema() -> dict:
    text = resources.files("octantwalk").joinpath("schemas/analysis_report.schema.json").read_text()
    return json.loads(text)


def _group_summary(s: StepSet, word_bound: int) -> dict:
    try:
        gens = group.generators(s)
    except (PreconditionError, ValueError) as exc:
        # large steps or a missing direction: the three involutions do not exist
        return {"verdict": "NotApplicable", "order": None, "bound": None, "reason": str(exc),
                "pair_orders": None, "orbit_sum_zero": None}
    probe = group.group_order_probe(gens, word_bound=word_bound)
    pairs = {}
    for (i, j), name in zip([(0, 1), (1, 2), (0, 2)], ["phi_psi", "psi_tau", "phi_tau"]):
        pairs[name] = group.pair_order(gens[i], gens[j])
    os_zero = None
    if probe.finite and probe.sign_consistent:
        os_zero = group.orbit_sum_probe(gens, probe=probe).zero
    return {
        "verdict": str(probe),
        "order": probe.order,
        "bound": probe.bound,
        "reason": None,
        "pair_orders": pairs,
        "orbit_sum_zero": os_zero,
    }


def analyze(
    spec,
    *,
    force_fem: bool = False,
    levels=fem.DEFAULT_LEVELS,
    with_group: bool = True,
    word_bound: int = group.WORD_BOUND,
) -> AnalysisReport:
    """Run the whole pipeline on a step set or its textual specification.

    Raises :class:`HalfSpacePrecondition` (carrying the partial report in
    ``exc.report``) when the steps lie in a half-space.
    """
    t0 = time.perf_counter()
    s = spec if isinstance(spec, StepSet) else parse_steps(spec)
    text = s.format()
    hs = half_space_check(s)
    dim = dimensionality(s)
    had = hadamard_decompose(s)
    report = AnalysisReport(
        spec=text,
        steps=[[st.dx, st.dy, st.dz, str(st.weight)] for st in s],
        half_space={"contained": hs.contained, "witness_normal": list(hs.witness_normal) if hs.witness_normal else None},
        dimension={"dim": dim.dim, "witness": list(dim.witness)},
        hadamard={"kind": had.kind, "forms": [f.describe() for f in had.forms]},
    )
    timings = report.timings
    timings["structure"] = time.perf_counter() - t0
    if hs.contained:
        exc = HalfSpacePrecondition(
            f"steps lie in the half-space with normal {hs.witness_normal}", hs.witness_normal
        )
        exc.report = report
        raise exc

    t = time.perf_counter()
    inv = inventory(s)
    cp = critical.find_critical_point(inv)
    cov = critical.covariance(inv, cp)
    tri = critical.triangle_of(cov)
    timings["critical"] = time.perf_counter() - t
    report.critical = {"point": [float(v) for v in cp.point], "rho": cp.rho, "residual": cp.residual}
    report.correlations = {"a": cov.a, "b": cov.b, "c": cov.c}
    report.triangle = {
        "angles": list(tri.angles),
        "side_lengths": list(tri.side_lengths),
        "vertices": tri.vertices.tolist(),
    }

    t = time.perf_counter()
    est = principal_eigenvalue(tri.angles, force_fem=force_fem, levels=levels, triangle=tri)
    timings["eigenvalue"] = time.perf_counter() - t
    report.eigenvalue = {
        "lambda1": est.lambda1,
        "method": est.method,
        "levels": est.levels,
        "sequence": est.sequence,
    }
    report.exponent = spectra.excursion_exponent(est.lambda1)
    tw = spectra.total_walks_exponent(inv, cp, est.lambda1)
    report.total_walks = {
        "case": tw.case,
        "beta": tw.beta,
        "minimizer": list(tw.minimizer),
        "drift": [str(Fraction(d)) for d in tw.drift],
    }

    if with_group:
        t = time.perf_counter()
        report.group = _group_summary(s, word_bound)
        timings["group"] = time.perf_counter() - t
    timings["total"] = time.perf_counter() - t0
    return report
