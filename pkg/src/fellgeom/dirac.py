"""Dirac operator constraint solver and the physics-facing operations.

A candidate Dirac operator is a cotangent field: one block per unit, at
the position its pattern dictates.  For a fixed pattern every admissibility
condition used here is real-linear in the block entries, so the solution
space is the kernel of a real linear system, computed pattern by pattern.

The sector condition ("s0_reality") forbids the leptoquark positions:
blocks connecting different sectors, except a block joining a unit with
its own conjugate, which stays inside a single conjugation orbit.  The
tensor-factor condition is a rank test on individual matrices, not a
linear constraint; it is reported per basis element instead of entering
the system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    RealLinearSystem,
    adjoint,
    as_complex_matrix,
    commutator,
    hermitian_spectrum,
    operator_norm,
    real_nullspace,
    tensor_rank_one,
)
from .representation import Representation
from .reports import CheckReport
from .sheaf import COTANGENT, MorphismField, Pattern, enumerate_patterns

LINEAR_FLAGS = ("self_adjoint", "j_real", "chi_anticommute", "first_order", "s0_reality")
ALL_FLAGS = LINEAR_FLAGS + ("tensor_factor",)

#: pattern pre-prune filter implied by each constraint flag
FILTER_OF_FLAG = {
    "self_adjoint": "involution",
    "chi_anticommute": "chirality_flip",
    "j_real": "conjugation_equivariance",
    "s0_reality": "sector",
}


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintSet:
    flags: frozenset

    def __post_init__(self):
        flags = frozenset(self.flags)
        unknown = flags - set(ALL_FLAGS)
        if unknown:
            raise ValueError(f"unknown constraint flags {sorted(unknown)}")
        if not flags:
            raise ValueError("at least one constraint flag is required")
        object.__setattr__(self, "flags", flags)

    @classmethod
    def of(cls, *names) -> "ConstraintSet":
        return cls(frozenset(names))

    def __contains__(self, name: str) -> bool:
        return name in self.flags

    def sorted(self) -> list:
        return [f for f in ALL_FLAGS if f in self.flags]


def _forbidden_sector_mask(rep: Representation) -> np.ndarray:
    """0/1 mask of entries sitting in leptoquark block positions."""
    cfg = rep.config
    mask = np.zeros((rep.dimension, rep.dimension))
    for i, r in enumerate(rep.units):
        for j, c in enumerate(rep.units):
            cross = cfg.sector[r] != cfg.sector[c] and c != cfg.conjugate(r)
            if cross:
                mask[rep.block.block_slice(i), rep.block.block_slice(j)] = 1.0
    return mask


def check_s0_reality(rep: Representation, x, tol: float = DEFAULT_TOL) -> bool:
    """True when no nonzero block of x sits at a leptoquark position."""
    a = as_complex_matrix(x)
    return float(np.max(np.abs(a * _forbidden_sector_mask(rep)))) <= tol if a.size else True


def _pattern_unknowns(rep: Representation, pattern: Pattern):
    """Column labels (unit index, row, col, re/im) for the pattern's fibers."""
    labels = []
    for i, u in enumerate(rep.units):
        r, c = pattern.block_position(u)
        rows, cols = rep.block.dims[rep.unit_index[r]], rep.block.dims[rep.unit_index[c]]
        for a in range(rows):
            for b in range(cols):
                labels.append((i, a, b, "re"))
                labels.append((i, a, b, "im"))
    return tuple(labels)


def materialize(rep: Representation, pattern: Pattern, coeffs) -> np.ndarray:
    """Turn a real coefficient vector (re/im pairs per entry) into the m x m matrix."""
    labels = _pattern_unknowns(rep, pattern)
    vec = np.asarray(coeffs, dtype=float).reshape(-1)
    if vec.size != len(labels):
        raise ValueError(f"expected {len(labels)} real coefficients, got {vec.size}")
    x = np.zeros((rep.dimension, rep.dimension), dtype=complex)
    for value, (i, a, b, part) in zip(vec, labels):
        if value == 0.0:
            continue
        u = rep.units[i]
        r, c = pattern.block_position(u)
        ri, ci = rep.unit_index[r], rep.unit_index[c]
        row = rep.block.offsets[ri] + a
        col = rep.block.offsets[ci] + b
        x[row, col] += value if part == "re" else 1j * value
    return x


def field_of(rep: Representation, pattern: Pattern, coeffs) -> MorphismField:
    """The same coefficients as a morphism field (per-unit fiber blocks)."""
    x = materialize(rep, pattern, coeffs)
    fibers = {}
    for u in rep.units:
        r, c = pattern.block_position(u)
        fibers[u] = rep.block.block(x, rep.unit_index[r], rep.unit_index[c])
    return MorphismField.build(rep.config.bundle, pattern, fibers)


def _residual_maps(rep: Representation, constraints: ConstraintSet):
    """Real-linear matrix maps whose joint kernel is the solution space."""
    maps = []
    if "self_adjoint" in constraints:
        maps.append(lambda x: [x - adjoint(x)])
    if "j_real" in constraints:
        sign = rep.config.spin_sign
        maps.append(lambda x: [rep.conjugate_by_J(x) - sign * x])
    if "chi_anticommute" in constraints:
        maps.append(lambda x: [x @ rep.chi + rep.chi @ x])
    if "s0_reality" in constraints:
        mask = _forbidden_sector_mask(rep)
        maps.append(lambda x: [x * mask])
    if "first_order" in constraints:
        basis = [blocks for _, _, _, blocks in rep.algebra_basis()]
        rhos = [rep.rho(b) for b in basis]
        opps = [rep.rho_opp(b) for b in basis]

        def first_order(x):
            return [commutator(commutator(x, ra), ob) for ra in rhos for ob in opps]

        maps.append(first_order)
    return maps


def constraint_system(rep: Representation, pattern: Pattern,
                      constraints: ConstraintSet) -> RealLinearSystem:
    """Realified linear system for one pattern under the flagged constraints.

    Unknowns are the re/im parts of the pattern's fiber entries; each
    scalar condition contributes one real row, in a fixed flag/equation
    order.  The tensor-factor flag is nonlinear and contributes no rows.
    """
    labels = _pattern_unknowns(rep, pattern)
    maps = _residual_maps(rep, constraints)
    columns = []
    for k in range(len(labels)):
        e = np.zeros(len(labels))
        e[k] = 1.0
        x = materialize(rep, pattern, e)
        parts = []
        for f in maps:
            for mat in f(x):
                parts.append(mat.real.reshape(-1))
                parts.append(mat.imag.reshape(-1))
        columns.append(np.concatenate(parts) if parts else np.zeros(0))
    matrix = np.column_stack(columns) if columns else np.zeros((0, 0))
    return RealLinearSystem(matrix, labels)


def check_constraints(rep: Representation, x, constraints: ConstraintSet,
                      opp_dims=None, tol: float = DEFAULT_TOL) -> dict:
    """Residual table for one matrix, evaluated directly on dense matrices.

    Independent of the solver path: nothing here touches the linear system
    or its nullspace.
    """
    a = as_complex_matrix(x)
    out = {}
    if "self_adjoint" in constraints:
        r = operator_norm(a - adjoint(a))
        out["self_adjoint"] = CheckReport("self_adjoint", r <= tol, r)
    if "j_real" in constraints:
        r = operator_norm(rep.conjugate_by_J(a) - rep.config.spin_sign * a)
        out["j_real"] = CheckReport("j_real", r <= tol, r)
    if "chi_anticommute" in constraints:
        r = operator_norm(a @ rep.chi + rep.chi @ a)
        out["chi_anticommute"] = CheckReport("chi_anticommute", r <= tol, r)
    if "first_order" in constraints:
        r = first_order_residual(rep, a)
        out["first_order"] = CheckReport("first_order", r <= tol, r)
    if "s0_reality" in constraints:
        r = float(np.max(np.abs(a * _forbidden_sector_mask(rep)))) if a.size else 0.0
        out["s0_reality"] = CheckReport("s0_reality", r <= tol, r)
    if "tensor_factor" in constraints:
        ok, worst = check_tensor_factor(rep, a, opp_dims, tol)
        out["tensor_factor"] = CheckReport("tensor_factor", ok, worst)
    return out


def check_tensor_factor(rep: Representation, x, opp_dims, tol: float = DEFAULT_TOL):
    """Rank test per nonzero block: does it factor as (fiber) x (opposite fiber)?

    ``opp_dims`` maps each unit to the dimension of the opposite tensor
    factor; the unit's H-block dimension must be divisible by it.  Without
    annotations every fiber is scalar on the opposite side and the test is
    vacuously true.  Returns (all_pass, worst secondary singular value).
    """
    a = as_complex_matrix(x)
    if not opp_dims:
        return True, 0.0
    ok, worst = True, 0.0
    for i, r in enumerate(rep.units):
        for j, c in enumerate(rep.units):
            blk = rep.block.block(a, i, j)
            if float(np.max(np.abs(blk))) <= tol:
                continue
            o_r, o_c = int(opp_dims[r]), int(opp_dims[c])
            n_r, n_c = rep.block.dims[i], rep.block.dims[j]
            if n_r % o_r or n_c % o_c:
                raise ValueError(
                    f"opposite factor dims ({o_r},{o_c}) do not divide block dims ({n_r},{n_c})"
                )
            e_r, e_c = n_r // o_r, n_c // o_c
            s = np.linalg.svd(
                blk.reshape(e_r, o_r, e_c, o_c).transpose(0, 2, 1, 3).reshape(e_r * e_c, o_r * o_c),
                compute_uv=False,
            )
            second = float(s[1]) if s.size > 1 else 0.0
            worst = max(worst, second)
            if not tensor_rank_one(blk, (e_r, e_c, o_r, o_c), tol):
                ok = False
    return ok, worst


@dataclass(frozen=True)
class DiracSolution:
    """A pattern stratum of the moduli space: real-linear basis plus residuals."""

    pattern: Pattern
    basis: tuple          # real coefficient vectors, one per dimension
    matrices: tuple       # the same basis, materialized as m x m matrices
    residuals: tuple      # per basis element: {flag: CheckReport}

    @property
    def real_dimension(self) -> int:
        return len(self.basis)

    def worst_residual(self) -> float:
        worst = 0.0
        for table in self.residuals:
            for rep_ in table.values():
                worst = max(worst, rep_.residual)
        return worst


def solve_pattern(rep: Representation, pattern: Pattern, constraints: ConstraintSet,
                  opp_dims=None, tol: float = DEFAULT_TOL) -> DiracSolution:
    system = constraint_system(rep, pattern, constraints)
    kernel = real_nullspace(system, tol)
    matrices = tuple(materialize(rep, pattern, v) for v in kernel)
    residuals = tuple(
        check_constraints(rep, m, constraints, opp_dims=opp_dims, tol=max(tol, 1e-8))
        for m in matrices
    )
    return DiracSolution(pattern, tuple(map(tuple, kernel)), matrices, residuals)


def _pattern_sort_key(rep: Representation, pattern: Pattern):
    return tuple(rep.unit_index[pattern.target(u)] for u in rep.units)


def dirac_space(rep: Representation, constraints: ConstraintSet, prune: bool = True,
                max_units: int = 8, allow_large: bool = False, opp_dims=None,
                tol: float = DEFAULT_TOL) -> list:
    """All nonzero pattern strata of admissible Dirac operators.

    With ``prune`` the pattern enumeration drops patterns that cannot carry
    a fully supported solution (see the filters in ``enumerate_patterns``);
    the slow path (``prune=False``) solves every pattern and is the
    reference the pruned path is tested against.
    """
    units = rep.units
    if len(units) > max_units and not allow_large:
        raise EnumerationCapError(
            f"{len(units)} units exceeds the enumeration cap {max_units}; "
            "raise max_units or pass allow_large"
        )
    filters = tuple(
        FILTER_OF_FLAG[f] for f in constraints.sorted() if f in FILTER_OF_FLAG
    ) if prune else ()
    patterns = enumerate_patterns(rep.config.bundle.groupoid, COTANGENT, filters, rep.config)
    solutions = []
    for pattern in sorted(patterns, key=lambda p: _pattern_sort_key(rep, p)):
        sol = solve_pattern(rep, pattern, constraints, opp_dims=opp_dims, tol=tol)
        if sol.real_dimension > 0:
            solutions.append(sol)
    return solutions


def moduli_dimension(solutions) -> int:
    return sum(s.real_dimension for s in solutions)


# -- first order machinery ----------------------------------------------------

def first_order_residual(rep: Representation, x) -> float:
    """Max over algebra basis pairs of ||[[x, rho(a)], rho_opp(b)]||."""
    a = as_complex_matrix(x)
    if a.shape != (rep.dimension, rep.dimension):
        raise ValueError(f"operator must be {rep.dimension} x {rep.dimension}")
    basis = [blocks for _, _, _, blocks in rep.algebra_basis()]
    worst = 0.0
    for ea in basis:
        ca = commutator(a, rep.rho(ea))
        for eb in basis:
            worst = max(worst, operator_norm(commutator(ca, rep.rho_opp(eb))))
    return worst


def first_order_bracket_gap(rep: Representation, x) -> float:
    """Max difference between the two bracket orders [[x,a],b^o] and [[x,b^o],a].

    Zero whenever the two actions commute (all scalar fibers), by the
    Jacobi identity.
    """
    a = as_complex_matrix(x)
    basis = [blocks for _, _, _, blocks in rep.algebra_basis()]
    worst = 0.0
    for ea in basis:
        ra = rep.rho(ea)
        for eb in basis:
            ob = rep.rho_opp(eb)
            gap = commutator(commutator(a, ra), ob) - commutator(commutator(a, ob), ra)
            worst = max(worst, operator_norm(gap))
    return worst


def derivation_identity_check(rep: Representation, x, tol: float = 1e-12) -> CheckReport:
    """Leibniz identity [x, ab^o] = a[x, b^o] + [x, a]b^o over basis pairs."""
    a = as_complex_matrix(x)
    basis = [blocks for _, _, _, blocks in rep.algebra_basis()]
    worst = 0.0
    for ea in basis:
        ra = rep.rho(ea)
        for eb in basis:
            ob = rep.rho_opp(eb)
            gap = commutator(a, ra @ ob) - ra @ commutator(a, ob) - commutator(a, ra) @ ob
            worst = max(worst, operator_norm(gap))
    return CheckReport("derivation_identity", worst <= tol, worst)


def acts_as_zero_derivation(rep: Representation, x, tol: float = DEFAULT_TOL) -> bool:
    """Whether [x, rho(a)] = 0 for every basis element of A."""
    a = as_complex_matrix(x)
    return all(
        operator_norm(commutator(a, rep.rho(blocks))) <= tol
        for _, _, _, blocks in rep.algebra_basis()
    )


# -- fluctuations --------------------------------------------------------------

@dataclass(frozen=True)
class FluctuationTerm:
    r: float
    u: tuple  # per-unit blocks of an algebra element with unitary image


def fluctuate(rep: Representation, d, terms, constraints: ConstraintSet | None = None,
              tol: float = DEFAULT_TOL):
    """D^f = sum_j r_j U_j D U_j*, with a residual report on the result.

    Every U_j must be unitary in rho(A).  Self-adjointness and the grading
    relation survive any real coefficients; J-reality and the sector
    condition are re-checked rather than assumed.
    """
    a = as_complex_matrix(d)
    if constraints is None:
        constraints = ConstraintSet.of("self_adjoint", "j_real", "chi_anticommute", "s0_reality")
    total = np.zeros_like(a)
    for term in terms:
        u_mat = rep.rho(list(term.u))
        defect = operator_norm(u_mat @ adjoint(u_mat) - np.eye(rep.dimension))
        if defect > max(tol, 1e-8):
            raise ValueError(f"fluctuation term is not unitary (defect {defect:.3e})")
        total = total + float(term.r) * (u_mat @ a @ adjoint(u_mat))
    report = check_constraints(rep, total, constraints, tol=max(tol, 1e-8))
    return total, report


def spectrum_report(rep: Representation, d, tol: float = DEFAULT_TOL) -> dict:
    """Signed spectrum and the |eigenvalue| multiset ("masses")."""
    eigs = hermitian_spectrum(as_complex_matrix(d), tol=max(tol, 1e-8))
    return {
        "eigenvalues": [float(v) for v in eigs],
        "masses": sorted(float(abs(v)) for v in eigs),
    }


# -- observables ---------------------------------------------------------------

def random_j_commuting_section(rep: Representation, rng: np.random.Generator) -> np.ndarray:
    """x = y + J y J^{-1} commutes with J for any y."""
    m = rep.dimension
    y = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return y + rep.conjugate_by_J(y)


def observable_closure_check(rep: Representation, samples: int = 100,
                             tol: float = 1e-10, seed: int = 0,
                             pairs=None) -> dict:
    """Products of J-commuting sections commute with J.

    Accepts explicit (x, y) pairs or draws ``samples`` random ones; inputs
    whose own J-commutator exceeds ``tol`` are rejected.
    """
    rng = np.random.default_rng(seed)
    if pairs is None:
        pairs = [
            (random_j_commuting_section(rep, rng), random_j_commuting_section(rep, rng))
            for _ in range(samples)
        ]
    worst_in, worst_out = 0.0, 0.0
    for x, y in pairs:
        rx, ry = rep.j_commutator_norm(x), rep.j_commutator_norm(y)
        if max(rx, ry) > tol * max(1.0, operator_norm(x), operator_norm(y)):
            raise ValueError("input section does not commute with J within tolerance")
        worst_in = max(worst_in, rx, ry)
        prod = as_complex_matrix(x) @ as_complex_matrix(y)
        scale = max(1.0, operator_norm(prod))
        worst_out = max(worst_out, rep.j_commutator_norm(prod) / scale)
    return {
        "pairs": len(pairs),
        "max_input_residual": worst_in,
        "max_product_residual": worst_out,
        "pass": worst_out <= tol,
    }


def generate_observable_algebra(generators, tol: float = DEFAULT_TOL, cap: int | None = None) -> dict:
    """Close the complex span of the generators under product and adjoint.

    Returns the complex dimension of the fixed point; capped at m^2.
    """
    mats = [as_complex_matrix(g) for g in generators]
    if not mats:
        return {"dimension": 0, "iterations": 0}
    m = mats[0].shape[0]
    if any(g.shape != (m, m) for g in mats):
        raise ValueError("generators must share one square shape")
    cap = cap or m * m
    basis_rows: list[np.ndarray] = []
    span_mats: list[np.ndarray] = []

    def insert(mat) -> bool:
        v = mat.reshape(-1).astype(complex)
        scale = np.linalg.norm(v)
        if scale <= tol:
            return False
        w = v.copy()
        for b in basis_rows:
            w = w - (b.conj() @ w) * b
        if np.linalg.norm(w) <= tol * scale:
            return False
        basis_rows.append(w / np.linalg.norm(w))
        span_mats.append(mat)
        return True

    for g in mats:
        insert(g)
    iterations = 0
    changed = True
    while changed and len(basis_rows) < cap:
        iterations += 1
        changed = False
        snapshot = list(span_mats)
        for a in snapshot:
            if insert(adjoint(a)):
                changed = True
            for b in snapshot:
                if len(basis_rows) >= cap:
                    break
                if insert(a @ b):
                    changed = True
    return {"dimension": len(basis_rows), "iterations": iterations}


# -- distance ------------------------------------------------------------------

def _hermitian_param_basis(rep: Representation):
    """Real basis of the self-adjoint algebra elements, unit by unit."""
    out = []
    for i, u in enumerate(rep.units):
        n = rep.block.dims[i]
        for r in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[r, r] = 1.0
            out.append((i, e))
        for r in range(n):
            for c in range(r + 1, n):
                e = np.zeros((n, n), dtype=complex)
                e[r, c] = e[c, r] = 1.0
                out.append((i, e))
                e = np.zeros((n, n), dtype=complex)
                e[r, c] = 1j
                e[c, r] = -1j
                out.append((i, e))
    return out


def _embed_block(rep: Representation, i: int, blk: np.ndarray) -> np.ndarray:
    x = np.zeros((rep.dimension, rep.dimension), dtype=complex)
    sl = rep.block.block_slice(i)
    x[sl, sl] = blk
    return x


def connes_distance(rep: Representation, d, i: str, j: str,
                    resolution: float = 1e-9) -> float:
    """sup |a_i - a_j| over self-adjoint a with ||[D, rho(a)]|| <= 1.

    The endpoint units must carry scalar (1-dimensional) blocks.  The sup
    is computed by convex maximization (spectral-norm constrained) over the
    real parametrization of self-adjoint algebra elements; if the commutant
    direction a_i - a_j is unconstrained the distance is infinite.
    """
    a = as_complex_matrix(d)
    if i not in rep.unit_index or j not in rep.unit_index:
        raise ValueError(f"unknown distance endpoints ({i!r}, {j!r})")
    ii, jj = rep.unit_index[i], rep.unit_index[j]
    if rep.block.dims[ii] != 1 or rep.block.dims[jj] != 1:
        raise ValueError("distance endpoints must carry scalar blocks")
    if i == j:
        return 0.0
    params = _hermitian_param_basis(rep)
    embedded = [_embed_block(rep, k, blk) for k, blk in params]
    # the linear functional a -> a_i - a_j on the parameter basis
    oi, oj = rep.block.offsets[ii], rep.block.offsets[jj]
    functional = np.array([float((x[oi, oi] - x[oj, oj]).real) for x in embedded])
    # unbounded iff some direction with [D, rho] = 0 separates the endpoints
    columns = []
    for x in embedded:
        c = commutator(a, x)
        columns.append(np.concatenate([c.real.reshape(-1), c.imag.reshape(-1)]))
    kernel = real_nullspace(np.column_stack(columns), tol=DEFAULT_TOL)
    for v in kernel:
        if abs(functional @ v) > 1e-9:
            return float("inf")

    import cvxpy as cp

    t = cp.Variable(len(params))
    expr = sum(t[k] * embedded[k] for k in range(len(params)))
    comm = a @ expr - expr @ a
    problem = cp.Problem(cp.Maximize(functional @ t), [cp.sigma_max(comm) <= 1.0])
    for solver, opts in (("CLARABEL", {}), ("SCS", {"eps": min(resolution, 1e-6)})):
        try:
            problem.solve(solver=solver, **opts)
        except cp.error.SolverError:
            continue
        if problem.status in ("optimal", "optimal_inaccurate"):
            return float(problem.value)
        if problem.status in ("unbounded", "unbounded_inaccurate"):
            return float("inf")
    raise RuntimeError(f"distance optimization failed (status {problem.status})")
