"""Command-line front end: ``octantwalk {analyze,eig,classify,count,mesh}``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor

from . import critical, enumeration, fem, spectra
from .errors import MemoryGuard, OctantWalkError, PreconditionError
from .report import analyze, principal_eigenvalue
from .stepset import parse_steps

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PRECONDITION = 2
EXIT_USAGE = 64

CSV_COLUMNS = [
    "index", "spec", "dim", "hadamard", "a", "b", "c", "alpha", "beta", "gamma",
    "lambda1", "method", "lambda", "group_verdict",
]

_PI_RE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$", re.IGNORECASE)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_angle(text: str) -> float:
    """Radians, or a rational multiple of pi such as ``2pi/3``, ``pi/2``, ``0.5*pi``."""
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        num = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_levels(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like 3:8, got {text!r}") from None
    return a, b


def _read_spec(args) -> str:
    if args.steps is not None:
        return args.steps
    with open(args.file, encoding="utf-8") as fh:
        return fh.read()


# -- subcommands ---------------------------------------------------------------


def _fmt(v) -> str:
    return "-" if v is None else (f"{v:.12g}" if isinstance(v, float) else str(v))


def cmd_analyze(args) -> int:
    spec = _read_spec(args)
    try:
        report = analyze(
            spec, force_fem=args.force_fem, levels=args.levels, with_group=not args.no_group
        )
    except PreconditionError as exc:
        partial = getattr(exc, "report", None)
        if args.json and partial is not None:
            print(partial.to_json(indent=2))
        elif partial is not None:
            print(f"half-space: contained (normal {partial.half_space['witness_normal']})")
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.json:
        print(report.to_json(indent=2))
        return EXIT_OK
    r = report
    rows = [
        ("steps", r.spec),
        ("half-space", "contained" if r.half_space["contained"] else "not contained"),
        ("dimension", r.dimension["dim"]),
        ("hadamard", r.hadamard["kind"]),
        ("critical point", " ".join(_fmt(v) for v in r.critical["point"])),
        ("rho", _fmt(r.critical["rho"])),
        ("a b c", " ".join(_fmt(r.correlations[k]) for k in "abc")),
        ("angles", " ".join(_fmt(v) for v in r.triangle["angles"])),
        ("lambda1", f"{_fmt(r.eigenvalue['lambda1'])} ({r.eigenvalue['method']})"),
        ("lambda", _fmt(r.exponent)),
        ("total walks", f"{r.total_walks['case']} beta={_fmt(r.total_walks['beta'])}"),
    ]
    if r.group is not None:
        rows.append(("group", r.group["verdict"]))
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


def cmd_eig(args) -> int:
    levels = args.levels
    if args.birectangular is not None:
        angles = (math.pi / 2, math.pi / 2, args.birectangular)
    elif args.digon is not None:
        lam = spectra.digon_lambda1(args.digon)
        return _print_eig(args, lam, "ClosedFormDigon", [])
    elif args.cap is not None:
        lam = spectra.cap_lambda1(args.cap)
        return _print_eig(args, lam, "Legendre", [])
    else:
        angles = tuple(args.angles)
    if args.wynn or args.force_fem:
        est = principal_eigenvalue(angles, force_fem=args.force_fem, levels=levels)
        if est.method == "FEM+Wynn" and not args.wynn:
            est.lambda1 = est.sequence[-1][1]
        return _print_eig(args, est.lambda1, est.method, est.sequence)
    est = principal_eigenvalue(angles, levels=levels)
    if est.method == "FEM+Wynn":
        # without --wynn report the finest raw level
        return _print_eig(args, est.sequence[-1][1], "FEM", est.sequence)
    return _print_eig(args, est.lambda1, est.method, est.sequence)


def _print_eig(args, lam, method, sequence) -> int:
    if args.json:
        print(json.dumps({"lambda1": lam, "method": method, "sequence": sequence,
                          "exponent": spectra.excursion_exponent(lam)}, indent=2))
        return EXIT_OK
    for k, v in sequence:
        print(f"level {k:2d}  {v:.15g}")
    print(f"lambda1 = {lam:.15g}  [{method}]")
    print(f"lambda  = {spectra.excursion_exponent(lam):.15g}")
    return EXIT_OK


def classify_one(job):
    """One CSV row for ``(index, spec, levels, with_group)``; never raises."""
    index, spec, levels, with_group = job
    row = dict.fromkeys(CSV_COLUMNS, "")
    row["index"] = index
    row["spec"] = spec
    try:
        r = analyze(spec, levels=levels, with_group=with_group)
    except OctantWalkError as exc:
        partial = getattr(exc, "report", None)
        if partial is not None:
            row["dim"] = partial.dimension["dim"]
            row["hadamard"] = partial.hadamard["kind"]
        row["method"] = type(exc).__name__
        return row
    row.update(
        dim=r.dimension["dim"],
        hadamard=r.hadamard["kind"],
        a=repr(r.correlations["a"]),
        b=repr(r.correlations["b"]),
        c=repr(r.correlations["c"]),
        alpha=repr(r.triangle["angles"][0]),
        beta=repr(r.triangle["angles"][1]),
        gamma=repr(r.triangle["angles"][2]),
        lambda1=repr(r.eigenvalue["lambda1"]),
        method=r.eigenvalue["method"],
        group_verdict=r.group["verdict"] if r.group else "",
    )
    row["lambda"] = repr(r.exponent)
    return row


def classify_specs(specs, workers: int = 1, levels=fem.DEFAULT_LEVELS, with_group=True):
    jobs = [(i, s, levels, with_group) for i, s in enumerate(specs)]
    if workers <= 1:
        return [classify_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(classify_one, jobs))


def cmd_classify(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        specs = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    rows = classify_specs(specs, args.workers, args.levels, not args.no_group)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out != "-" else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_count(args) -> int:
    s = parse_steps(args.steps)
    try:
        series = enumeration.count_excursions(s, args.n, args.box, exact=not args.scaled)
    except MemoryGuard:
        print("exact DP too large, switching to scaled floating point", file=sys.stderr)
        series = enumeration.count_excursions(s, args.n, args.box, exact=False)
    sys.stdout.write(series.to_csv())
    if series.truncated:
        print("# box truncates some excursions", file=sys.stderr)
    if args.fit:
        p = enumeration.period(series)
        fit = enumeration.growth_and_exponent_fit(series, p)
        print(f"# period={p} rho_hat={fit.rho_hat:.12g} lambda_hat={fit.lambda_hat:.12g}")
    return EXIT_OK


def cmd_mesh(args) -> int:
    tri = critical.triangle_from_angles(args.angles)
    m = fem.triangulate(tri, args.level, args.initial)
    fem.export_mesh(m, args.out)
    print(f"wrote {m.n_vertices} vertices, {m.n_triangles} triangles to {args.out}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="octantwalk", description="Octant walk exponents via spherical triangles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="full pipeline for one step set")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--steps", help="cross-section string or JSON step list")
    src.add_argument("--file", help="file holding the step specification")
    a.add_argument("--json", action="store_true")
    a.add_argument("--force-fem", action="store_true")
    a.add_argument("--levels", type=parse_levels, default=fem.DEFAULT_LEVELS)
    a.add_argument("--no-group", action="store_true")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("eig", help="principal eigenvalue of a spherical domain")
    dom = e.add_mutually_exclusive_group(required=True)
    dom.add_argument("--angles", nargs=3, type=parse_angle, metavar=("ALPHA", "BETA", "GAMMA"))
    dom.add_argument("--birectangular", type=parse_angle, metavar="BETA")
    dom.add_argument("--digon", type=parse_angle, metavar="ALPHA")
    dom.add_argument("--cap", type=parse_angle, metavar="ZETA")
    e.add_argument("--levels", type=parse_levels, default=fem.DEFAULT_LEVELS)
    e.add_argument("--wynn", action="store_true")
    e.add_argument("--force-fem", action="store_true")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_eig)

    c = sub.add_parser("classify", help="batch analysis to CSV")
    c.add_argument("--input", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--levels", type=parse_levels, default=fem.DEFAULT_LEVELS)
    c.add_argument("--no-group", action="store_true")
    c.set_defaults(func=cmd_classify)

    n = sub.add_parser("count", help="excursion counts as CSV")
    n.add_argument("--steps", required=True)
    n.add_argument("--n", type=int, required=True)
    n.add_argument("--box", type=int)
    n.add_argument("--fit", action="store_true")
    n.add_argument("--scaled", action="store_true", help="floating point DP, log counts")
    n.set_defaults(func=cmd_count)

    m = sub.add_parser("mesh", help="write a refined triangle mesh as OFF")
    m.add_argument("--angles", nargs=3, type=parse_angle, required=True)
    m.add_argument("--level", type=int, required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--initial", choices=["single", "barycentric"], default="single")
    m.set_defaults(func=cmd_mesh)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001 - last-resort handler maps to exit 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())
