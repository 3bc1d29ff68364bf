"""Geometry spec files: JSON parsing, validation and serialization.

A geometry file declares the units (id, fiber dim, chirality, sector),
the conjugation pairing, the groupoid, the sign conventions, the default
constraint set, and optionally an explicit Dirac operator (pattern plus
per-unit fiber entries) and opposite-factor dimension annotations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .bundle import FellBundle, build_bundle
from .dirac import ALL_FLAGS, ConstraintSet
from .groupoid import FiniteGroupoid, pair_groupoid, partition_groupoid
from .linalg import matrix_from_json, matrix_to_json
from .representation import GeometryConfig, Representation
from .sheaf import COTANGENT, MorphismField, Pattern, field_as_matrix


class SpecFileError(ValueError):
    """Input file problem, with enough context to locate the field."""


@dataclass
class GeometrySpec:
    name: str
    units: list              # of dicts: id, dim, chirality, sector
    conjugation: list        # of [id, id] pairs (self-pairs allowed)
    groupoid: dict           # {"type": "pair"} or {"type": "partition", "classes": [...]}
    j_squared: int = 1
    spin_sign: int = 1
    constraints: list = field(default_factory=lambda: list(ConstraintSet.of(
        "self_adjoint", "j_real", "chi_anticommute", "s0_reality").sorted()))
    dirac: dict | None = None      # {"pattern": {id: id}, "entries": {id: matrix}}
    opp_dims: dict | None = None   # {id: int}


def _require(cond: bool, message: str):
    if not cond:
        raise SpecFileError(message)


def parse_spec(text: str) -> GeometrySpec:
    """Parse and validate a geometry spec from JSON text."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"invalid JSON: {exc}") from exc
    _require(isinstance(raw, dict), "top level must be a JSON object")
    _require("units" in raw, "missing field 'units'")
    units = raw["units"]
    _require(isinstance(units, list) and units, "'units' must be a non-empty list")
    ids = []
    for u in units:
        _require(isinstance(u, dict) and "id" in u, "every unit needs an 'id'")
        uid = u["id"]
        _require(uid not in ids, f"duplicate unit id {uid!r}")
        ids.append(uid)
        _require("dim" in u, f"unit {uid!r}: missing field 'dim'")
        _require(isinstance(u["dim"], int) and u["dim"] > 0,
                 f"unit {uid!r}: 'dim' must be a positive integer")
        _require(u.get("chirality") in (1, -1), f"unit {uid!r}: 'chirality' must be 1 or -1")
        _require(u.get("sector") in ("particle", "antiparticle"),
                 f"unit {uid!r}: 'sector' must be 'particle' or 'antiparticle'")
    dims = {u["id"]: u["dim"] for u in units}

    conj_pairs = raw.get("conjugation", [])
    _require(isinstance(conj_pairs, list), "'conjugation' must be a list of id pairs")
    seen = set()
    for pair in conj_pairs:
        _require(isinstance(pair, list) and len(pair) == 2, "conjugation entries are [id, id] pairs")
        a, b = pair
        for x in (a, b):
            _require(x in ids, f"conjugation references undeclared unit {x!r}")
        _require(a not in seen and (b not in seen or b == a),
                 f"unit {a!r} or {b!r} appears in more than one conjugation pair")
        seen.update({a, b})
        if a != b:
            _require(dims[a] == dims[b],
                     f"conjugation pairs units of different dims: {a!r} and {b!r}")
    _require(seen == set(ids),
             f"conjugation must cover every unit; missing {sorted(set(ids) - seen)}")

    groupoid = raw.get("groupoid", {"type": "pair"})
    _require(isinstance(groupoid, dict) and groupoid.get("type") in ("pair", "partition"),
             "'groupoid' must declare type 'pair' or 'partition'")
    if groupoid["type"] == "partition":
        classes = groupoid.get("classes")
        _require(isinstance(classes, list) and classes, "partition groupoid needs 'classes'")
        flat = [u for c in classes for u in c]
        _require(sorted(flat) == sorted(ids), "groupoid classes must partition the unit ids")

    j_squared = raw.get("j_squared", 1)
    spin_sign = raw.get("spin_sign", 1)
    _require(j_squared in (1, -1), "'j_squared' must be 1 or -1")
    _require(spin_sign in (1, -1), "'spin_sign' must be 1 or -1")

    constraints = raw.get("constraints",
                          ["self_adjoint", "j_real", "chi_anticommute", "s0_reality"])
    _require(isinstance(constraints, list) and constraints, "'constraints' must be a non-empty list")
    for c in constraints:
        _require(c in ALL_FLAGS, f"unknown constraint flag {c!r}")

    dirac = raw.get("dirac")
    if dirac is not None:
        _require(isinstance(dirac, dict) and "pattern" in dirac and "entries" in dirac,
                 "'dirac' needs 'pattern' and 'entries'")
        pattern = dirac["pattern"]
        _require(isinstance(pattern, dict) and set(pattern) == set(ids),
                 "dirac pattern must map every unit id")
        for a, b in pattern.items():
            _require(b in ids, f"dirac pattern sends {a!r} to undeclared unit {b!r}")
        for uid in ids:
            _require(uid in dirac["entries"], f"dirac entries missing unit {uid!r}")

    opp_dims = raw.get("opp_dims")
    if opp_dims is not None:
        _require(isinstance(opp_dims, dict) and set(opp_dims) == set(ids),
                 "'opp_dims' must map every unit id")
        for uid, od in opp_dims.items():
            _require(isinstance(od, int) and od > 0, f"opp_dims[{uid!r}] must be a positive integer")
            _require(dims[uid] % od == 0,
                     f"opp_dims[{uid!r}] = {od} must divide the unit dim {dims[uid]}")

    return GeometrySpec(
        name=str(raw.get("name", "geometry")),
        units=[dict(u) for u in units],
        conjugation=[list(p) for p in conj_pairs],
        groupoid=dict(groupoid),
        j_squared=j_squared,
        spin_sign=spin_sign,
        constraints=list(constraints),
        dirac=dirac,
        opp_dims=dict(opp_dims) if opp_dims else None,
    )


def load_spec(path) -> GeometrySpec:
    with open(path, encoding="utf-8") as f:
        return parse_spec(f.read())


def serialize_spec(spec: GeometrySpec) -> str:
    """Canonical JSON text; parse(serialize(spec)) == spec."""
    payload = {
        "name": spec.name,
        "units": spec.units,
        "conjugation": spec.conjugation,
        "groupoid": spec.groupoid,
        "j_squared": spec.j_squared,
        "spin_sign": spec.spin_sign,
        "constraints": spec.constraints,
    }
    if spec.dirac is not None:
        payload["dirac"] = spec.dirac
    if spec.opp_dims is not None:
        payload["opp_dims"] = spec.opp_dims
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def build_groupoid(spec: GeometrySpec) -> FiniteGroupoid:
    ids = [u["id"] for u in spec.units]
    if spec.groupoid["type"] == "pair":
        return pair_groupoid(ids)
    return partition_groupoid(ids, spec.groupoid["classes"])


def build_geometry(spec: GeometrySpec):
    """(config, representation) for a parsed spec."""
    g = build_groupoid(spec)
    bundle = build_bundle(g, {u["id"]: u["dim"] for u in spec.units})
    conjugation = {}
    for a, b in spec.conjugation:
        conjugation[a] = b
        conjugation[b] = a
    try:
        config = GeometryConfig(
            bundle=bundle,
            chirality={u["id"]: u["chirality"] for u in spec.units},
            sector={u["id"]: u["sector"] for u in spec.units},
            conjugation=conjugation,
            j_squared=spec.j_squared,
            spin_sign=spec.spin_sign,
        )
    except ValueError as exc:
        raise SpecFileError(str(exc)) from exc
    return config, Representation(config)


def dirac_field(spec: GeometrySpec, rep: Representation) -> MorphismField | None:
    """The explicit Dirac operator declared in the file, if any."""
    if spec.dirac is None:
        return None
    g = rep.config.bundle.groupoid
    try:
        pattern = Pattern.from_dict(COTANGENT, spec.dirac["pattern"], g)
    except ValueError as exc:
        raise SpecFileError(f"dirac pattern: {exc}") from exc
    fibers = {}
    for uid in g.units:
        try:
            fibers[uid] = matrix_from_json(spec.dirac["entries"][uid])
        except ValueError as exc:
            raise SpecFileError(f"dirac entry for unit {uid!r}: {exc}") from exc
    try:
        return MorphismField.build(rep.config.bundle, pattern, fibers)
    except ValueError as exc:
        raise SpecFileError(f"dirac field: {exc}") from exc


def dirac_matrix(spec: GeometrySpec, rep: Representation) -> np.ndarray | None:
    fld = dirac_field(spec, rep)
    if fld is None:
        return None
    return field_as_matrix(rep.config.bundle, fld)


def serialize_field(bundle: FellBundle, fld: MorphismField) -> dict:
    return {
        "pattern": fld.pattern.as_dict(),
        "entries": {u: matrix_to_json(fld.fiber(u)) for u in bundle.groupoid.units},
    }


def two_point_fixture_path():
    """Path of the bundled two-point example file."""
    return resources.files("fellgeom.data").joinpath("two_point.json")


def load_two_point_spec() -> GeometrySpec:
    return parse_spec(two_point_fixture_path().read_text(encoding="utf-8"))
