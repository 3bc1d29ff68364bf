"""Finite principal groupoids: equivalence relations on a finite unit set.

An arrow is determined by its (range, source) pair, so the arrow set is
never stored; membership is computed from the class partition.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Arrow:
    range: str
    source: str

    def is_unit(self) -> bool:
        return self.range == self.source


class FiniteGroupoid:
    """Equivalence relation on an ordered set of unit ids.

    Unit order is the declaration order and fixes all downstream block
    orderings (Hilbert space layout, grading, real structure).
    """

    def __init__(self, units, classes):
        units = tuple(units)
        if len(units) == 0:
            raise ValueError("a groupoid needs at least one unit")
        if len(set(units)) != len(units):
            raise ValueError("duplicate unit ids")
        classes = tuple(tuple(c) for c in classes)
        seen = [u for c in classes for u in c]
        if sorted(seen) != sorted(units):
            raise ValueError("classes must partition the units exactly")
        self.units = units
        self.classes = classes
        self._class_of = {u: idx for idx, c in enumerate(classes) for u in c}

    def class_of(self, unit: str) -> int:
        try:
            return self._class_of[unit]
        except KeyError:
            raise ValueError(f"unknown unit {unit!r}") from None

    def same_class(self, a: str, b: str) -> bool:
        return self.class_of(a) == self.class_of(b)

    def has_arrow(self, r: str, s: str) -> bool:
        return self.same_class(r, s)

    def arrow(self, r: str, s: str) -> Arrow:
        if not self.has_arrow(r, s):
            raise ValueError(f"no arrow from {s!r} to {r!r}: units lie in different classes")
        return Arrow(r, s)

    def unit_arrow(self, u: str) -> Arrow:
        self.class_of(u)
        return Arrow(u, u)

    def arrows(self):
        """All arrows in unit declaration order (range-major)."""
        for r in self.units:
            for s in self.units:
                if self.same_class(r, s):
                    yield Arrow(r, s)

    @property
    def arrow_count(self) -> int:
        return sum(len(c) ** 2 for c in self.classes)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteGroupoid)
            and self.units == other.units
            and self.classes == other.classes
        )

    def __repr__(self):
        return f"FiniteGroupoid(units={self.units!r}, classes={self.classes!r})"


def pair_groupoid(units) -> FiniteGroupoid:
    """The pair groupoid: every unit related to every other."""
    units = tuple(units)
    return FiniteGroupoid(units, (units,))


def partition_groupoid(units, classes) -> FiniteGroupoid:
    """The equivalence relation with the given classes."""
    return FiniteGroupoid(units, classes)


def compose(g1: Arrow, g2: Arrow) -> Arrow:
    """g1 after g2; defined when source(g1) = range(g2)."""
    if g1.source != g2.range:
        raise ValueError(f"arrows not composable: {g1} then {g2}")
    return Arrow(g1.range, g2.source)


def inverse(g: Arrow) -> Arrow:
    return Arrow(g.source, g.range)
