import itertools

import numpy as np
import pytest

from fellgeom.bundle import (
    FiberElement,
    Section,
    build_bundle,
    check_saturated,
    fiber_basis,
    fiber_involution,
    fiber_multiply,
    matrix_as_section,
    opposite_bundle,
    random_section,
    section_as_matrix,
    section_involution,
    section_multiply,
    unit_fiber,
)
from fellgeom.groupoid import Arrow, pair_groupoid, partition_groupoid
from fellgeom.linalg import adjoint, operator_norm


@pytest.fixture
def scalar_bundle():
    return build_bundle(pair_groupoid(["L", "R", "Lbar", "Rbar"]), dict.fromkeys(["L", "R", "Lbar", "Rbar"], 1))


@pytest.fixture
def mixed_bundle():
    return build_bundle(pair_groupoid(["a", "b"]), {"a": 1, "b": 2})


class TestBuild:
    def test_scalar_bundle_has_sixteen_fibers(self, scalar_bundle):
        shapes = [scalar_bundle.fiber_shape(arr) for arr in scalar_bundle.groupoid.arrows()]
        assert len(shapes) == 16
        assert all(s == (1, 1) for s in shapes)
        assert scalar_bundle.section_dimension() == 16

    def test_single_unit_full_matrix_fiber(self):
        b = build_bundle(pair_groupoid(["x"]), {"x": 2})
        assert b.fiber_shape(Arrow("x", "x")) == (2, 2)
        assert b.section_dimension() == 4

    def test_rectangular_shapes(self, mixed_bundle):
        assert mixed_bundle.fiber_shape(Arrow("a", "a")) == (1, 1)
        assert mixed_bundle.fiber_shape(Arrow("a", "b")) == (1, 2)
        assert mixed_bundle.fiber_shape(Arrow("b", "a")) == (2, 1)
        assert mixed_bundle.fiber_shape(Arrow("b", "b")) == (2, 2)

    def test_inverse_arrow_has_transposed_shape(self, mixed_bundle):
        r, c = mixed_bundle.fiber_shape(Arrow("a", "b"))
        assert mixed_bundle.fiber_shape(Arrow("b", "a")) == (c, r)

    def test_missing_dim_rejected(self):
        with pytest.raises(ValueError):
            build_bundle(pair_groupoid(["a", "b"]), {"a": 1})
        with pytest.raises(ValueError):
            build_bundle(pair_groupoid(["a"]), {"a": 0})


class TestFiberOps:
    def test_multiply_follows_composition(self, scalar_bundle):
        e1 = FiberElement(scalar_bundle, Arrow("L", "R"), np.array([[2.0]]))
        e2 = FiberElement(scalar_bundle, Arrow("R", "L"), np.array([[3.0]]))
        prod = fiber_multiply(e1, e2)
        assert prod.arrow == Arrow("L", "L")
        assert prod.value[0, 0] == 6.0

    def test_unit_fiber_neutral(self, mixed_bundle):
        e = FiberElement(mixed_bundle, Arrow("a", "b"), np.array([[1.0, 2.0]]))
        left = fiber_multiply(unit_fiber(mixed_bundle, "a"), e)
        right = fiber_multiply(e, unit_fiber(mixed_bundle, "b"))
        assert np.array_equal(left.value, e.value)
        assert np.array_equal(right.value, e.value)

    def test_shape_rule(self, mixed_bundle):
        e1 = FiberElement(mixed_bundle, Arrow("a", "b"), np.array([[1.0, 0.0]]))
        e2 = FiberElement(mixed_bundle, Arrow("b", "b"), np.eye(2))
        assert fiber_multiply(e1, e2).value.shape == (1, 2)

    def test_non_composable_rejected(self, scalar_bundle):
        e1 = FiberElement(scalar_bundle, Arrow("L", "R"), np.array([[1.0]]))
        e2 = FiberElement(scalar_bundle, Arrow("Lbar", "Rbar"), np.array([[1.0]]))
        with pytest.raises(ValueError):
            fiber_multiply(e1, e2)

    def test_involution(self, mixed_bundle):
        e = FiberElement(mixed_bundle, Arrow("a", "b"), np.array([[1.0 + 1j, 2.0]]))
        star = fiber_involution(e)
        assert star.arrow == Arrow("b", "a")
        assert star.value.shape == (2, 1)
        again = fiber_involution(star)
        assert again.arrow == e.arrow
        assert np.array_equal(again.value, e.value)

    def test_involution_fixes_self_adjoint_unit(self, mixed_bundle):
        e = unit_fiber(mixed_bundle, "b")
        star = fiber_involution(e)
        assert star.arrow == e.arrow
        assert np.array_equal(star.value, e.value)

    def test_star_of_product(self, mixed_bundle):
        rng = np.random.default_rng(0)
        e1 = FiberElement(mixed_bundle, Arrow("a", "b"),
                          rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2)))
        e2 = FiberElement(mixed_bundle, Arrow("b", "a"),
                          rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1)))
        lhs = fiber_involution(fiber_multiply(e1, e2))
        rhs = fiber_multiply(fiber_involution(e2), fiber_involution(e1))
        assert lhs.arrow == rhs.arrow
        assert np.allclose(lhs.value, rhs.value)

    def test_associativity_over_random_bundles(self):
        rng = np.random.default_rng(1)
        bundle = build_bundle(
            partition_groupoid(["a", "b", "c"], [["a", "b", "c"]]), {"a": 2, "b": 1, "c": 3}
        )
        arrows = list(bundle.groupoid.arrows())
        for g1, g2, g3 in itertools.product(arrows, repeat=3):
            if g1.source != g2.range or g2.source != g3.range:
                continue
            def rand(arrow):
                shape = bundle.fiber_shape(arrow)
                return FiberElement(bundle, arrow,
                                    rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
            e1, e2, e3 = rand(g1), rand(g2), rand(g3)
            lhs = fiber_multiply(fiber_multiply(e1, e2), e3)
            rhs = fiber_multiply(e1, fiber_multiply(e2, e3))
            assert lhs.arrow == rhs.arrow
            assert np.allclose(lhs.value, rhs.value, atol=1e-12)


class TestSaturation:
    def test_scalar_example(self, scalar_bundle):
        assert check_saturated(scalar_bundle)

    def test_mixed_dims(self, mixed_bundle):
        assert check_saturated(mixed_bundle)

    def test_partition_bundle(self):
        b = build_bundle(
            partition_groupoid(["a", "b", "c"], [["a", "b"], ["c"]]), {"a": 2, "b": 1, "c": 3}
        )
        assert check_saturated(b)


class TestOpposite:
    def test_double_opposite(self, mixed_bundle):
        assert opposite_bundle(opposite_bundle(mixed_bundle)) == mixed_bundle

    def test_opposite_shapes_invert(self, mixed_bundle):
        opp = opposite_bundle(mixed_bundle)
        assert opp.fiber_shape(Arrow("a", "b")) == (2, 1)

    def test_multiplication_order_reverses(self, mixed_bundle):
        opp = opposite_bundle(mixed_bundle)
        rng = np.random.default_rng(2)
        v1 = rng.standard_normal((2, 1))
        v2 = rng.standard_normal((2, 2))
        e1 = FiberElement(opp, Arrow("a", "b"), v1)
        e2 = FiberElement(opp, Arrow("b", "b"), v2)
        prod = fiber_multiply(e1, e2)
        assert prod.arrow == Arrow("a", "b")
        assert np.allclose(prod.value, v2 @ v1)

    def test_involution_commutes_with_opposite(self, mixed_bundle):
        opp = opposite_bundle(mixed_bundle)
        rng = np.random.default_rng(3)
        v = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
        e = FiberElement(opp, Arrow("a", "b"), v)
        star = fiber_involution(e)
        assert star.arrow == Arrow("b", "a")
        assert np.array_equal(star.value, adjoint(v))

    def test_scalar_opposite_isomorphic(self, scalar_bundle):
        # all fibers are C, so the opposite carries identical shapes
        opp = opposite_bundle(scalar_bundle)
        for arrow in scalar_bundle.groupoid.arrows():
            assert opp.fiber_shape(arrow) == scalar_bundle.fiber_shape(arrow)

    def test_saturated(self, mixed_bundle):
        assert check_saturated(opposite_bundle(mixed_bundle))


class TestSections:
    def test_full_basis_spans_all_matrices(self, scalar_bundle):
        mats = []
        for arrow in scalar_bundle.groupoid.arrows():
            for e in fiber_basis(scalar_bundle, arrow):
                s = Section(scalar_bundle, {(arrow.range, arrow.source): e.value})
                mats.append(section_as_matrix(s).reshape(-1))
        assert np.linalg.matrix_rank(np.array(mats)) == 16

    def test_zero_section(self, scalar_bundle):
        assert not section_as_matrix(Section(scalar_bundle)).any()

    def test_multiplicativity(self, mixed_bundle):
        rng = np.random.default_rng(4)
        s = random_section(mixed_bundle, rng)
        t = random_section(mixed_bundle, rng)
        lhs = section_as_matrix(section_multiply(s, t))
        rhs = section_as_matrix(s) @ section_as_matrix(t)
        assert operator_norm(lhs - rhs) < 1e-10

    def test_star_compatibility(self, mixed_bundle):
        rng = np.random.default_rng(5)
        s = random_section(mixed_bundle, rng)
        assert np.allclose(section_as_matrix(section_involution(s)), adjoint(section_as_matrix(s)))

    def test_matrix_round_trip(self, mixed_bundle):
        rng = np.random.default_rng(6)
        s = random_section(mixed_bundle, rng)
        m = section_as_matrix(s)
        assert np.array_equal(section_as_matrix(matrix_as_section(mixed_bundle, m)), m)

    def test_support_outside_arrows_rejected(self):
        b = build_bundle(partition_groupoid(["a", "b"], [["a"], ["b"]]), {"a": 1, "b": 1})
        bad = np.array([[0, 1.0], [0, 0]])
        with pytest.raises(ValueError):
            matrix_as_section(b, bad)

    def test_section_dimension_matches_count(self):
        for k, dims in ((2, (1, 2)), (3, (1, 1, 2))):
            units = [f"u{i}" for i in range(k)]
            b = build_bundle(pair_groupoid(units), dict(zip(units, dims)))
            assert b.section_dimension() == sum(dims) ** 2
