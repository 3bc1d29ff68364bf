"""Finite-dimensional Fell bundles over a finite principal groupoid.

The fiber over a unit i is the full matrix algebra of size n_i; the fiber
over an arrow (i, j) is the space of n_i x n_j complex matrices (the
Morita equivalence bimodule between the endpoint algebras).  The opposite
bundle carries the same data with the multiplication order reversed; its
fiber values are shaped along the inverted arrow.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .groupoid import Arrow, FiniteGroupoid, compose, inverse
from .linalg import BlockStructure, adjoint, as_complex_matrix


@dataclass(frozen=True)
class FellBundle:
    groupoid: FiniteGroupoid
    dims: dict
    opposite: bool = False

    def dim(self, unit: str) -> int:
        try:
            return self.dims[unit]
        except KeyError:
            raise ValueError(f"no fiber dimension declared for unit {unit!r}") from None

    def fiber_shape(self, arrow: Arrow) -> tuple[int, int]:
        if not self.groupoid.has_arrow(arrow.range, arrow.source):
            raise ValueError(f"{arrow} is not an arrow of the groupoid")
        if self.opposite:
            return (self.dim(arrow.source), self.dim(arrow.range))
        return (self.dim(arrow.range), self.dim(arrow.source))

    def block_structure(self) -> BlockStructure:
        return BlockStructure(tuple(self.dim(u) for u in self.groupoid.units))

    def section_dimension(self) -> int:
        """Complex dimension of the section algebra: sum of n_i * n_j over arrows."""
        return sum(
            self.dim(a.range) * self.dim(a.source) for a in self.groupoid.arrows()
        )


def build_bundle(groupoid: FiniteGroupoid, dims) -> FellBundle:
    dims = dict(dims)
    for u in groupoid.units:
        if u not in dims:
            raise ValueError(f"missing fiber dimension for unit {u!r}")
        if int(dims[u]) <= 0:
            raise ValueError(f"fiber dimension for unit {u!r} must be positive")
    extra = set(dims) - set(groupoid.units)
    if extra:
        raise ValueError(f"dimensions declared for unknown units {sorted(extra)}")
    return FellBundle(groupoid, {u: int(dims[u]) for u in groupoid.units})


def opposite_bundle(bundle: FellBundle) -> FellBundle:
    return replace(bundle, opposite=not bundle.opposite)


@dataclass(frozen=True)
class FiberElement:
    bundle: FellBundle
    arrow: Arrow
    value: np.ndarray

    def __post_init__(self):
        v = as_complex_matrix(self.value)
        expected = self.bundle.fiber_shape(self.arrow)
        if v.shape != expected:
            raise ValueError(
                f"fiber over {self.arrow} must have shape {expected}, got {v.shape}"
            )
        object.__setattr__(self, "value", v)


def fiber_multiply(e1: FiberElement, e2: FiberElement) -> FiberElement:
    """Bimodule multiplication along composable arrows."""
    if e1.bundle != e2.bundle:
        raise ValueError("fiber elements belong to different bundles")
    target = compose(e1.arrow, e2.arrow)
    if e1.bundle.opposite:
        value = e2.value @ e1.value
    else:
        value = e1.value @ e2.value
    return FiberElement(e1.bundle, target, value)


def fiber_involution(e: FiberElement) -> FiberElement:
    return FiberElement(e.bundle, inverse(e.arrow), adjoint(e.value))


def unit_fiber(bundle: FellBundle, unit: str) -> FiberElement:
    return FiberElement(bundle, Arrow(unit, unit), np.eye(bundle.dim(unit)))


def fiber_basis(bundle: FellBundle, arrow: Arrow):
    """Matrix-unit basis of the fiber over an arrow, row-major order."""
    rows, cols = bundle.fiber_shape(arrow)
    out = []
    for r in range(rows):
        for c in range(cols):
            m = np.zeros((rows, cols), dtype=complex)
            m[r, c] = 1.0
            out.append(FiberElement(bundle, arrow, m))
    return out


def check_saturated(bundle: FellBundle) -> bool:
    """Products of fiber basis elements span the target fiber, for every
    composable pair of arrows."""
    g = bundle.groupoid
    for g1 in g.arrows():
        for g2 in g.arrows():
            if g1.source != g2.range:
                continue
            target = compose(g1, g2)
            rows, cols = bundle.fiber_shape(target)
            products = []
            for e1 in fiber_basis(bundle, g1):
                for e2 in fiber_basis(bundle, g2):
                    products.append(fiber_multiply(e1, e2).value.reshape(-1))
            rank = np.linalg.matrix_rank(np.array(products))
            if rank < rows * cols:
                return False
    return True


class Section:
    """One fiber element per arrow (zero allowed), i.e. a block matrix.

    Blocks are stored per (range, source) unit pair; missing blocks are
    zero.  Sections of an opposite bundle are not supported here; the
    opposite factor is realized through the real structure in the
    representation module.
    """

    def __init__(self, bundle: FellBundle, blocks=None):
        if bundle.opposite:
            raise ValueError("sections are only materialized for the primal bundle")
        self.bundle = bundle
        self.blocks = {}
        for key, val in (blocks or {}).items():
            arrow = key if isinstance(key, Arrow) else Arrow(*key)
            shape = bundle.fiber_shape(arrow)
            v = as_complex_matrix(val)
            if v.shape != shape:
                raise ValueError(f"block over {arrow} must have shape {shape}, got {v.shape}")
            if np.any(v != 0):
                self.blocks[(arrow.range, arrow.source)] = v

    def block(self, r: str, s: str) -> np.ndarray:
        shape = self.bundle.fiber_shape(self.bundle.groupoid.arrow(r, s))
        return self.blocks.get((r, s), np.zeros(shape, dtype=complex))


def section_as_matrix(s: Section) -> np.ndarray:
    """Faithful *-homomorphism onto block matrices over the unit ordering."""
    units = s.bundle.groupoid.units
    index = {u: i for i, u in enumerate(units)}
    bs = s.bundle.block_structure()
    return bs.assemble({(index[r], index[c]): v for (r, c), v in s.blocks.items()})


def matrix_as_section(bundle: FellBundle, matrix) -> Section:
    """Inverse of section_as_matrix; rejects support outside the arrow set."""
    m = as_complex_matrix(matrix)
    bs = bundle.block_structure()
    if m.shape != (bs.total, bs.total):
        raise ValueError(f"matrix shape {m.shape} does not match total dimension {bs.total}")
    units = bundle.groupoid.units
    blocks = {}
    for i, r in enumerate(units):
        for j, c in enumerate(units):
            blk = bs.block(m, i, j)
            if np.any(blk != 0):
                if not bundle.groupoid.has_arrow(r, c):
                    raise ValueError(f"nonzero block at ({r!r}, {c!r}) has no underlying arrow")
                blocks[(r, c)] = blk
    return Section(bundle, blocks)


def section_multiply(s: Section, t: Section) -> Section:
    """Convolution product: (s t)(r, c) = sum over u of s(r, u) t(u, c)."""
    if s.bundle != t.bundle:
        raise ValueError("sections belong to different bundles")
    g = s.bundle.groupoid
    blocks = {}
    for r in g.units:
        for c in g.units:
            if not g.has_arrow(r, c):
                continue
            acc = np.zeros(s.bundle.fiber_shape(Arrow(r, c)), dtype=complex)
            for u in g.units:
                if g.has_arrow(r, u) and g.has_arrow(u, c):
                    acc = acc + s.block(r, u) @ t.block(u, c)
            blocks[(r, c)] = acc
    return Section(s.bundle, blocks)


def section_involution(s: Section) -> Section:
    blocks = {(c, r): adjoint(v) for (r, c), v in s.blocks.items()}
    return Section(s.bundle, blocks)


def random_section(bundle: FellBundle, rng: np.random.Generator) -> Section:
    blocks = {}
    for a in bundle.groupoid.arrows():
        shape = bundle.fiber_shape(a)
        blocks[(a.range, a.source)] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return Section(bundle, blocks)
