"""Command line interface.

Commands: validate, dirac-space, spectrum, fluctuate, distance, report.
Exit codes: 0 all checks pass, 1 a check failed (or the solution set is
empty under --expect-nonempty), 2 input error.  The numeric tolerance can
be overridden with the FELLGEOM_TOL environment variable.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .bundle import check_saturated
from .dirac import (
    ConstraintSet,
    EnumerationCapError,
    FluctuationTerm,
    connes_distance,
    dirac_space,
    field_of,
    fluctuate,
    moduli_dimension,
    spectrum_report,
)
from .linalg import DEFAULT_TOL, matrix_from_json, matrix_to_json
from .reports import CheckReport, assemble_report, render_report
from .representation import check_grading, check_j_squared, check_order_zero
from .sheaf import ObjectSpace, check_sheaf_axioms
from .specfile import (
    SpecFileError,
    build_geometry,
    dirac_matrix,
    parse_spec,
    serialize_field,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _tolerance() -> float:
    raw = os.environ.get("FELLGEOM_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise SpecFileError(f"FELLGEOM_TOL must be a number, got {raw!r}")
    if not (tol > 0):
        raise SpecFileError("FELLGEOM_TOL must be positive")
    return tol


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc}") from exc


def _solution_json(rep, sol) -> dict:
    bundle = rep.config.bundle
    return {
        "pattern": sol.pattern.as_dict(),
        "real_dimension": sol.real_dimension,
        "basis": [
            serialize_field(bundle, field_of(rep, sol.pattern, np.array(v)))
            for v in sol.basis
        ],
        "residuals": [
            {name: rep_.to_json() for name, rep_ in table.items()}
            for table in sol.residuals
        ],
    }


def _validate_checks(spec, config, rep, tol):
    checks = [
        check_grading(rep, tol),
        check_order_zero(rep, tol),
        CheckReport("saturated", check_saturated(config.bundle), 0.0),
        check_j_squared(rep, tol),
    ]
    sheaf = check_sheaf_axioms(ObjectSpace(rep.units))
    checks.append(CheckReport("sheaf_axioms", sheaf["pass"], 0.0 if sheaf["pass"] else 1.0))
    return checks


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(render_report(report))
        return
    for name, entry in report.get("checks", {}).items():
        status = "ok" if entry["pass"] else "FAIL"
        print(f"{name:>16}: {status}  (residual {entry['residual']:.3e})")
    if "solver" in report:
        sol = report["solver"]
        print(f"patterns with solutions: {len(sol['solutions'])}; "
              f"total real dimension: {sol['total_dimension']}")
        for s in sol["solutions"]:
            print(f"  pattern {s['pattern']}  dim {s['real_dimension']}")
    if "spectrum" in report:
        print("eigenvalues:", report["spectrum"]["eigenvalues"])
        print("masses:", report["spectrum"]["masses"])
    if "distance" in report:
        d = report["distance"]
        print(f"distance {d['from']} -> {d['to']}: {d['value']}")


def cmd_validate(args) -> int:
    tol = _tolerance()
    text = _read(args.file)
    spec = parse_spec(text)
    config, rep = build_geometry(spec)
    checks = _validate_checks(spec, config, rep, tol)
    report = assemble_report(text, checks)
    _emit(report, args.json)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def _solve(spec, rep, args, tol):
    if args.constraints:
        names = [c.strip() for c in args.constraints.split(",") if c.strip()]
    else:
        names = spec.constraints
    constraints = ConstraintSet(frozenset(names))
    solutions = dirac_space(
        rep, constraints,
        prune=not getattr(args, "slow", False),
        max_units=args.max_units,
        opp_dims=spec.opp_dims,
        tol=tol,
    )
    return constraints, solutions


def cmd_dirac_space(args) -> int:
    tol = _tolerance()
    text = _read(args.file)
    spec = parse_spec(text)
    config, rep = build_geometry(spec)
    try:
        constraints, solutions = _solve(spec, rep, args, tol)
    except EnumerationCapError as exc:
        raise SpecFileError(str(exc)) from exc
    solver = {
        "constraints": constraints.sorted(),
        "solutions": [_solution_json(rep, s) for s in solutions],
        "total_dimension": moduli_dimension(solutions),
    }
    report = assemble_report(text, [], extra={"solver": solver})
    _emit(report, args.json)
    if args.expect_nonempty and not solutions:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _explicit_dirac(spec, rep, args, tol):
    d = dirac_matrix(spec, rep)
    if d is None and getattr(args, "from_solver", None) is not None:
        constraints = ConstraintSet(frozenset(spec.constraints))
        solutions = dirac_space(rep, constraints, max_units=args.max_units,
                                opp_dims=spec.opp_dims, tol=tol)
        idx = args.from_solver
        if not (0 <= idx < len(solutions)):
            raise SpecFileError(f"--from-solver index {idx} out of range "
                                f"({len(solutions)} solutions)")
        if not solutions[idx].matrices:
            raise SpecFileError("selected solution has an empty basis")
        d = solutions[idx].matrices[0]
    if d is None:
        raise SpecFileError("no explicit 'dirac' in the file; pass --from-solver INDEX")
    return d


def cmd_spectrum(args) -> int:
    tol = _tolerance()
    text = _read(args.file)
    spec = parse_spec(text)
    config, rep = build_geometry(spec)
    d = _explicit_dirac(spec, rep, args, tol)
    spect = spectrum_report(rep, d, tol)
    report = assemble_report(text, [], extra={"spectrum": spect})
    _emit(report, args.json)
    return EXIT_OK


def cmd_fluctuate(args) -> int:
    tol = _tolerance()
    text = _read(args.file)
    spec = parse_spec(text)
    config, rep = build_geometry(spec)
    d = _explicit_dirac(spec, rep, args, tol)
    terms_text = _read(args.terms)
    try:
        raw_terms = json.loads(terms_text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"terms file: invalid JSON: {exc}") from exc
    if not isinstance(raw_terms, list) or not raw_terms:
        raise SpecFileError("terms file must hold a non-empty list of {r, u} objects")
    terms = []
    for t in raw_terms:
        if not isinstance(t, dict) or "r" not in t or "u" not in t:
            raise SpecFileError("each fluctuation term needs 'r' and 'u'")
        blocks = []
        for unit in rep.units:
            if unit not in t["u"]:
                raise SpecFileError(f"fluctuation term missing unit {unit!r}")
            blocks.append(matrix_from_json(t["u"][unit]))
        terms.append(FluctuationTerm(float(t["r"]), tuple(blocks)))
    try:
        constraints = ConstraintSet(frozenset(spec.constraints))
        d_f, table = fluctuate(rep, d, terms, constraints, tol)
    except ValueError as exc:
        raise SpecFileError(str(exc)) from exc
    checks = list(table.values())
    fl = {
        "terms": len(terms),
        "result": matrix_to_json(d_f),
    }
    report = assemble_report(text, checks, extra={"fluctuation": fl})
    _emit(report, args.json)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def cmd_distance(args) -> int:
    tol = _tolerance()
    text = _read(args.file)
    spec = parse_spec(text)
    config, rep = build_geometry(spec)
    d = _explicit_dirac(spec, rep, args, tol)
    try:
        value = connes_distance(rep, d, args.from_unit, args.to_unit,
                                resolution=args.resolution)
    except ValueError as exc:
        raise SpecFileError(str(exc)) from exc
    payload = {
        "from": args.from_unit,
        "to": args.to_unit,
        "value": "unbounded" if math.isinf(value) else value,
    }
    report = assemble_report(text, [], extra={"distance": payload})
    _emit(report, args.json)
    return EXIT_OK


def cmd_report(args) -> int:
    tol = _tolerance()
    text = _read(args.file)
    spec = parse_spec(text)
    config, rep = build_geometry(spec)
    checks = _validate_checks(spec, config, rep, tol)
    constraints = ConstraintSet(frozenset(spec.constraints))
    solutions = dirac_space(rep, constraints, max_units=args.max_units,
                            opp_dims=spec.opp_dims, tol=tol)
    extra = {
        "solver": {
            "constraints": constraints.sorted(),
            "solutions": [_solution_json(rep, s) for s in solutions],
            "total_dimension": moduli_dimension(solutions),
        }
    }
    d = dirac_matrix(spec, rep)
    if d is not None:
        extra["spectrum"] = spectrum_report(rep, d, tol)
        extra["j_matrix_identity_residual"] = rep.j_matrix_identity_residual(d)
    report = assemble_report(text, checks, extra=extra)
    rendered = render_report(report)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(rendered)
    print(f"wrote {args.out}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fellgeom",
        description="Finite Fell bundle geometries: admissible Dirac operators and checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run the structural checks on a geometry file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dirac-space", help="solve for all admissible Dirac operators")
    p.add_argument("file")
    p.add_argument("--constraints", help="comma separated flags (default: the file's)")
    p.add_argument("--max-units", type=int, default=8)
    p.add_argument("--slow", action="store_true",
                   help="solve every pattern instead of the pruned enumeration")
    p.add_argument("--expect-nonempty", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dirac_space)

    p = sub.add_parser("spectrum", help="eigenvalues and masses of the Dirac operator")
    p.add_argument("file")
    p.add_argument("--from-solver", type=int, default=None,
                   help="use basis element 0 of the indexed solver solution")
    p.add_argument("--max-units", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fluctuate", help="apply gauge fluctuation terms to the Dirac operator")
    p.add_argument("file")
    p.add_argument("--terms", required=True, help="JSON file: list of {r, u} terms")
    p.add_argument("--from-solver", type=int, default=None)
    p.add_argument("--max-units", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fluctuate)

    p = sub.add_parser("distance", help="Connes distance between two units")
    p.add_argument("file")
    p.add_argument("--from", dest="from_unit", required=True)
    p.add_argument("--to", dest="to_unit", required=True)
    p.add_argument("--resolution", type=float, default=1e-9)
    p.add_argument("--from-solver", type=int, default=None)
    p.add_argument("--max-units", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("report", help="full machine readable report")
    p.add_argument("file")
    p.add_argument("--json", dest="out", required=True, metavar="OUT",
                   help="output path for the JSON report")
    p.add_argument("--max-units", type=int, default=8)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
