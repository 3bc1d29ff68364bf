"""Finite Fell bundle geometries.

Construct finite-dimensional Fell bundles over principal groupoids,
represent them on H = C^m with grading and real structure, enumerate
tangent/cotangent morphism fields, solve for the admissible Dirac
operators under a configurable constraint set, and evaluate spectra,
fluctuations and the induced distance.
"""
from .bundle import (
    FellBundle,
    FiberElement,
    Section,
    build_bundle,
    check_saturated,
    fiber_involution,
    fiber_multiply,
    matrix_as_section,
    opposite_bundle,
    section_as_matrix,
    section_involution,
    section_multiply,
)
from .dirac import (
    ConstraintSet,
    DiracSolution,
    EnumerationCapError,
    FluctuationTerm,
    acts_as_zero_derivation,
    check_s0_reality,
    connes_distance,
    constraint_system,
    derivation_identity_check,
    dirac_space,
    first_order_bracket_gap,
    first_order_residual,
    fluctuate,
    generate_observable_algebra,
    moduli_dimension,
    observable_closure_check,
    spectrum_report,
)
from .groupoid import Arrow, FiniteGroupoid, compose, inverse, pair_groupoid, partition_groupoid
from .linalg import (
    BlockStructure,
    RealLinearSystem,
    adjoint,
    anticommutator,
    commutator,
    hermitian_spectrum,
    operator_norm,
    real_nullspace,
    tensor_rank_one,
)
from .representation import (
    GeometryConfig,
    Representation,
    build_representation,
    check_grading,
    check_order_zero,
)
from .sheaf import (
    MorphismField,
    ObjectSpace,
    Pattern,
    check_sheaf_axioms,
    enumerate_patterns,
    field_as_matrix,
    field_multiply,
    matrix_as_field,
    restrict,
    sections_over,
    stalk,
)
from .specfile import GeometrySpec, SpecFileError, build_geometry, load_spec, parse_spec

__version__ = "0.1.0"
