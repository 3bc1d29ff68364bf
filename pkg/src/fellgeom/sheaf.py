"""Tangent/cotangent fields over the object space, and sheaf checks.

The base B is the discrete set of objects (one per groupoid unit).  A
cotangent field picks, at every object i, one morphism with range i: an
arrow (i, p(i)) plus a fiber element over it.  As a block matrix that is
one (possibly zero) nonzero block per block-row, at column p(i); tangent
fields are the same with rows and columns exchanged.  Fields keep their
pattern even where fibers vanish, so distinct strata stay distinct.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bundle import FellBundle
from .groupoid import Arrow, FiniteGroupoid
from .linalg import DEFAULT_TOL, as_complex_matrix

COTANGENT = "cotangent"
TANGENT = "tangent"

PATTERN_FILTERS = ("involution", "chirality_flip", "conjugation_equivariance", "sector")


@dataclass(frozen=True)
class Pattern:
    """Direction plus the map i -> p(i) within equivalence classes."""

    direction: str
    mapping: tuple

    def __post_init__(self):
        if self.direction not in (COTANGENT, TANGENT):
            raise ValueError(f"direction must be {COTANGENT!r} or {TANGENT!r}")
        object.__setattr__(self, "mapping", tuple(self.mapping))

    @classmethod
    def from_dict(cls, direction: str, mapping: dict, groupoid: FiniteGroupoid) -> "Pattern":
        pairs = []
        for u in groupoid.units:
            if u not in mapping:
                raise ValueError(f"pattern missing unit {u!r}")
            v = mapping[u]
            if not groupoid.same_class(u, v):
                raise ValueError(f"pattern sends {u!r} outside its class ({v!r})")
            pairs.append((u, v))
        return cls(direction, tuple(pairs))

    def as_dict(self) -> dict:
        return dict(self.mapping)

    def target(self, unit: str) -> str:
        for u, v in self.mapping:
            if u == unit:
                return v
        raise ValueError(f"pattern has no entry for unit {unit!r}")

    def block_position(self, unit: str) -> tuple[str, str]:
        """(row unit, column unit) of the block attached at this object."""
        v = self.target(unit)
        return (unit, v) if self.direction == COTANGENT else (v, unit)

    def arrow(self, unit: str) -> Arrow:
        r, c = self.block_position(unit)
        return Arrow(r, c)


def enumerate_patterns(groupoid: FiniteGroupoid, direction: str = COTANGENT,
                       filters=(), config=None) -> list[Pattern]:
    """All patterns over the groupoid, optionally pruned.

    Filters (each a necessary condition for a fully supported solution
    under the matching constraint):
      involution                p(p(i)) = i           (self-adjointness)
      chirality_flip            chirality(p(i)) != chirality(i)
      conjugation_equivariance  p(conj(i)) = conj(p(i))
      sector                    sector(p(i)) = sector(i), or p(i) = conj(i)
    The last three need a GeometryConfig for their unit data.
    """
    for f in filters:
        if f not in PATTERN_FILTERS:
            raise ValueError(f"unknown pattern filter {f!r}")
        if f != "involution" and config is None:
            raise ValueError(f"filter {f!r} needs a geometry config")
    units = groupoid.units
    choices = []
    for u in units:
        opts = [v for v in units if groupoid.same_class(u, v)]
        if "chirality_flip" in filters:
            opts = [v for v in opts if config.chirality[v] != config.chirality[u]]
        if "sector" in filters:
            opts = [v for v in opts
                    if config.sector[v] == config.sector[u] or v == config.conjugate(u)]
        choices.append(opts)
    out = []
    for images in itertools.product(*choices):
        mapping = dict(zip(units, images))
        if "involution" in filters:
            if any(mapping[mapping[u]] != u for u in units):
                continue
        if "conjugation_equivariance" in filters:
            if any(mapping[config.conjugate(u)] != config.conjugate(mapping[u]) for u in units):
                continue
        out.append(Pattern(direction, tuple(mapping.items())))
    return out


@dataclass(frozen=True)
class MorphismField:
    """A pattern plus one fiber value per object, along the pattern arrow."""

    pattern: Pattern
    fibers: tuple  # ((unit, ndarray), ...) in unit order

    @classmethod
    def build(cls, bundle: FellBundle, pattern: Pattern, fibers: dict) -> "MorphismField":
        pairs = []
        for u in bundle.groupoid.units:
            r, c = pattern.block_position(u)
            shape = bundle.fiber_shape(bundle.groupoid.arrow(r, c))
            v = as_complex_matrix(fibers.get(u, np.zeros(shape)))
            if v.shape != shape:
                raise ValueError(f"fiber at {u!r} must have shape {shape}, got {v.shape}")
            pairs.append((u, v))
        return cls(pattern, tuple(pairs))

    def fiber(self, unit: str) -> np.ndarray:
        for u, v in self.fibers:
            if u == unit:
                return v
        raise ValueError(f"no fiber at unit {unit!r}")

    def __eq__(self, other):
        if not isinstance(other, MorphismField) or self.pattern != other.pattern:
            return False
        return all(np.array_equal(a[1], b[1]) for a, b in zip(self.fibers, other.fibers))

    def __hash__(self):
        return hash(self.pattern)


def field_as_matrix(bundle: FellBundle, field: MorphismField) -> np.ndarray:
    index = {u: i for i, u in enumerate(bundle.groupoid.units)}
    bs = bundle.block_structure()
    blocks = {}
    for u, v in field.fibers:
        r, c = field.pattern.block_position(u)
        blocks[(index[r], index[c])] = blocks.get((index[r], index[c]), 0) + v
    return bs.assemble(blocks)


def matrix_as_field(bundle: FellBundle, matrix, direction: str = COTANGENT,
                    pattern: Pattern | None = None, tol: float = DEFAULT_TOL) -> MorphismField:
    """Read a block matrix back as a field.

    Without an explicit pattern, each block-row (cotangent) or block-column
    (tangent) must hold at most one nonzero block; empty lines default to
    the loop p(i) = i.  A matrix whose support violates the one-block rule
    or the given pattern is rejected.
    """
    m = as_complex_matrix(matrix)
    g = bundle.groupoid
    units = g.units
    bs = bundle.block_structure()
    if m.shape != (bs.total, bs.total):
        raise ValueError(f"matrix shape {m.shape} does not match total dimension {bs.total}")
    index = {u: i for i, u in enumerate(units)}

    def block(r, c):
        return bs.block(m, index[r], index[c])

    if pattern is None:
        mapping = {}
        for u in units:
            line = []
            for v in units:
                r, c = (u, v) if direction == COTANGENT else (v, u)
                if g.has_arrow(r, c) and np.max(np.abs(block(r, c))) > tol:
                    line.append(v)
            if len(line) > 1:
                kind = "row" if direction == COTANGENT else "column"
                raise ValueError(f"block-{kind} at {u!r} has {len(line)} nonzero blocks")
            mapping[u] = line[0] if line else u
        pattern = Pattern.from_dict(direction, mapping, g)
    else:
        if pattern.direction != direction:
            raise ValueError("pattern direction mismatch")
        support = {pattern.block_position(u) for u in units}
        for r in units:
            for c in units:
                if (r, c) in support or not g.has_arrow(r, c):
                    continue
                if np.max(np.abs(block(r, c))) > tol:
                    raise ValueError(f"nonzero block at ({r!r}, {c!r}) outside the pattern")
    fibers = {}
    for u in units:
        r, c = pattern.block_position(u)
        fibers[u] = block(r, c)
    return MorphismField.build(bundle, pattern, fibers)


def field_multiply(bundle: FellBundle, f: MorphismField, g: MorphismField) -> MorphismField:
    """Product of two same-direction fields; the result is again a field.

    Cotangent patterns compose as p_fg = p_g o p_f (follow f's arrow from
    the object, then g's); fibers multiply along the way.
    """
    if f.pattern.direction != g.pattern.direction:
        raise ValueError("cannot multiply fields of different directions")
    direction = f.pattern.direction
    units = bundle.groupoid.units
    mapping, fibers = {}, {}
    for u in units:
        if direction == COTANGENT:
            mid = f.pattern.target(u)
            mapping[u] = g.pattern.target(mid)
            fibers[u] = f.fiber(u) @ g.fiber(mid)
        else:
            mid = g.pattern.target(u)
            mapping[u] = f.pattern.target(mid)
            fibers[u] = f.fiber(mid) @ g.fiber(u)
    pattern = Pattern.from_dict(direction, mapping, bundle.groupoid)
    return MorphismField.build(bundle, pattern, fibers)


def transpose_field(bundle: FellBundle, f: MorphismField) -> MorphismField:
    """Adjoint of each fiber, arrows reversed: swaps tangent and cotangent."""
    direction = TANGENT if f.pattern.direction == COTANGENT else COTANGENT
    pattern = Pattern(direction, f.pattern.mapping)
    fibers = {u: f.fiber(u).conj().T for u in bundle.groupoid.units}
    return MorphismField.build(bundle, pattern, fibers)


def stalk(bundle: FellBundle, unit: str, direction: str = COTANGENT) -> list:
    """Admissible (arrow, fiber shape) choices at one object."""
    g = bundle.groupoid
    out = []
    for v in g.units:
        if not g.same_class(unit, v):
            continue
        arrow = Arrow(unit, v) if direction == COTANGENT else Arrow(v, unit)
        out.append((arrow, bundle.fiber_shape(arrow)))
    return out


# -- object space and the sheaf axioms ---------------------------------------

class ObjectSpace:
    """The discrete base B; members are subsets of objects."""

    def __init__(self, units):
        self.units = tuple(units)

    def member(self, *units) -> frozenset:
        bad = set(units) - set(self.units)
        if bad:
            raise ValueError(f"unknown objects {sorted(bad)}")
        return frozenset(units)

    def members(self):
        """All members, empty included, by size then unit order."""
        out = [frozenset()]
        for k in range(1, len(self.units) + 1):
            for combo in itertools.combinations(self.units, k):
                out.append(frozenset(combo))
        return out


def sections_over(member, choices: dict) -> list:
    """Sections over a member: one choice per object, exhaustively.

    ``choices`` maps each object to its finite list of stalk choices.  The
    empty member has exactly one section, the empty assignment.
    """
    objs = sorted(member)
    pools = [choices[u] for u in objs]
    return [dict(zip(objs, picks)) for picks in itertools.product(*pools)]


def restrict(sections, sub_member, member=None):
    """Forget the choices outside ``sub_member``; deduplicates, keeps order."""
    sub = frozenset(sub_member)
    if member is not None and not sub <= frozenset(member):
        raise ValueError("restriction target is not contained in the domain")
    seen, out = set(), []
    for s in sections:
        if not sub <= set(s):
            raise ValueError("section does not cover the restriction target")
        r = {u: s[u] for u in sorted(sub)}
        key = tuple(sorted(r.items()))
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


def _covers_of(member, max_piece: int = 2):
    """Deterministic cover family: singletons, the member itself, and
    overlapping unions of small pieces."""
    objs = sorted(member)
    covers = []
    if objs:
        covers.append([frozenset([u]) for u in objs])
        covers.append([frozenset(objs)])
        if len(objs) >= 2:
            # chain of overlapping pairs
            covers.append([frozenset(objs[i:i + 2]) for i in range(len(objs) - 1)])
            # a redundant cover with a nested piece
            covers.append([frozenset(objs), frozenset(objs[:1])])
    else:
        covers.append([])
    return covers


def check_sheaf_axioms(space: ObjectSpace, choices: dict | None = None) -> dict:
    """Normalization and gluing over every member of B.

    Enumerates sections over a small alphabet of stalk choices per object
    (two symbols by default), checks that the empty member has exactly one
    section, and that for each member and each cover in a deterministic
    family, compatible families glue to exactly one section.
    """
    if choices is None:
        choices = {u: ("a", "b") for u in space.units}
    normalization = len(sections_over(frozenset(), choices)) == 1
    gluing = True
    failures = []
    for member in space.members():
        full = sections_over(member, choices)
        full_keys = {tuple(sorted(s.items())) for s in full}
        for cover in _covers_of(member):
            if set().union(*cover) != set(member) and member:
                continue
            piece_sections = [sections_over(p, choices) for p in cover]
            glued = set()
            compatible = 0
            for family in itertools.product(*piece_sections):
                ok = True
                for s1, s2 in itertools.combinations(family, 2):
                    overlap = set(s1) & set(s2)
                    if any(s1[u] != s2[u] for u in overlap):
                        ok = False
                        break
                if not ok:
                    continue
                compatible += 1
                merged = {}
                for s in family:
                    merged.update(s)
                glued.add(tuple(sorted(merged.items())))
            if glued != full_keys or compatible != len(full_keys):
                gluing = False
                failures.append((sorted(member), [sorted(p) for p in cover]))
    return {
        "normalization": normalization,
        "gluing": gluing,
        "pass": normalization and gluing,
        "failures": failures,
    }
