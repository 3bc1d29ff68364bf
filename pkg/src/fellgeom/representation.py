"""Concrete geometry data on H = C^m: actions, grading, real structure.

H carries one block of size n_i per unit, in unit declaration order.  The
algebra A = (+)_i M_{n_i} acts block-diagonally (rho); the opposite action
is rho_opp(b) = J rho(b)* J*.  J is always (block permutation along the
conjugation pairing) followed by entrywise conjugation; with that form
J^2 = +1 holds identically, and a declared j_squared is validated against
it rather than trusted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import FellBundle
from .linalg import DEFAULT_TOL, adjoint, as_complex_matrix, commutator, operator_norm
from .reports import CheckReport

PARTICLE = "particle"
ANTIPARTICLE = "antiparticle"


@dataclass(frozen=True)
class GeometryConfig:
    """User-declared geometry data on top of a Fell bundle.

    conjugation maps every unit to its conjugate partner (an involution,
    fixed points allowed).  Properly paired units must have equal fiber
    dimension, equal chirality and opposite sector; a self-conjugate unit
    keeps whatever sector it declares.
    """

    bundle: FellBundle
    chirality: dict
    sector: dict
    conjugation: dict
    j_squared: int = 1
    spin_sign: int = 1

    def __post_init__(self):
        units = self.bundle.groupoid.units
        for name, table in (("chirality", self.chirality), ("sector", self.sector)):
            missing = [u for u in units if u not in table]
            if missing:
                raise ValueError(f"{name} missing for units {missing}")
        for u, chi in self.chirality.items():
            if chi not in (1, -1):
                raise ValueError(f"chirality of {u!r} must be +1 or -1, got {chi!r}")
        for u, sec in self.sector.items():
            if sec not in (PARTICLE, ANTIPARTICLE):
                raise ValueError(f"sector of {u!r} must be particle/antiparticle, got {sec!r}")
        for u in units:
            v = self.conjugation.get(u)
            if v is None or v not in units:
                raise ValueError(f"conjugation must map unit {u!r} to a declared unit")
            if self.conjugation.get(v) != u:
                raise ValueError(f"conjugation is not an involution at {u!r}")
            if u != v:
                if self.bundle.dim(u) != self.bundle.dim(v):
                    raise ValueError(f"conjugate pair ({u!r}, {v!r}) must have equal dims")
                if self.chirality[u] != self.chirality[v]:
                    raise ValueError(f"conjugate pair ({u!r}, {v!r}) must have equal chirality")
                if self.sector[u] == self.sector[v]:
                    raise ValueError(f"conjugate pair ({u!r}, {v!r}) must have opposite sector")
        if self.j_squared not in (1, -1) or self.spin_sign not in (1, -1):
            raise ValueError("j_squared and spin_sign must be +1 or -1")

    def conjugate(self, unit: str) -> str:
        return self.conjugation[unit]


class Representation:
    """Materialized (H, rho, rho_opp, chi, J) for a geometry config."""

    def __init__(self, config: GeometryConfig):
        self.config = config
        g = config.bundle.groupoid
        self.units = g.units
        self.unit_index = {u: i for i, u in enumerate(self.units)}
        self.block = config.bundle.block_structure()
        m = self.block.total
        self.dimension = m
        chi = np.zeros((m, m), dtype=complex)
        for i, u in enumerate(self.units):
            sl = self.block.block_slice(i)
            chi[sl, sl] = config.chirality[u] * np.eye(self.block.dims[i])
        self.chi = chi
        # block permutation of the conjugation pairing: (Pv)_i = v_{conj(i)}
        perm = np.zeros((m, m))
        for i, u in enumerate(self.units):
            j = self.unit_index[config.conjugate(u)]
            si, sj = self.block.block_slice(i), self.block.block_slice(j)
            perm[si, sj] = np.eye(self.block.dims[i])
        self.j_permutation = perm
        self.j_squared_actual = 1  # (P K)^2 = P^2 = I for an involutive pairing

    # -- algebra ---------------------------------------------------------

    def _blocks_of(self, a) -> list:
        """Normalize an algebra element to a list of per-unit square blocks."""
        if isinstance(a, dict):
            seq = [a.get(u, 0) for u in self.units]
        else:
            seq = list(a)
            if len(seq) != len(self.units):
                raise ValueError(f"algebra element needs {len(self.units)} blocks, got {len(seq)}")
        out = []
        for i, item in enumerate(seq):
            n = self.block.dims[i]
            arr = np.asarray(item, dtype=complex)
            if arr.ndim == 0:
                arr = arr.reshape(1, 1) * np.eye(n) if n > 1 else arr.reshape(1, 1)
            if arr.shape != (n, n):
                raise ValueError(
                    f"block {i} ({self.units[i]!r}) must be {n}x{n}, got {arr.shape}"
                )
            out.append(arr)
        return out

    def rho(self, a) -> np.ndarray:
        """Block-diagonal left action of A."""
        blocks = self._blocks_of(a)
        return self.block.assemble({(i, i): b for i, b in enumerate(blocks)})

    def rho_opp(self, b) -> np.ndarray:
        """Right action via the real structure: J rho(b)* J*."""
        return self.conjugate_by_J(adjoint(self.rho(b)))

    def algebra_basis(self):
        """Matrix-unit basis of A as (unit, row, col, element) tuples."""
        out = []
        for i, u in enumerate(self.units):
            n = self.block.dims[i]
            for r in range(n):
                for c in range(n):
                    blocks = [np.zeros((self.block.dims[k], self.block.dims[k])) for k in range(len(self.units))]
                    blocks[i] = np.zeros((n, n))
                    blocks[i][r, c] = 1.0
                    out.append((u, r, c, blocks))
        return out

    def algebra_unit(self):
        return [np.eye(self.block.dims[i]) for i in range(len(self.units))]

    # -- real structure ----------------------------------------------------

    def apply_J(self, v) -> np.ndarray:
        """Antiunitary J: permute blocks by the conjugation pairing, then conjugate."""
        vec = np.asarray(v, dtype=complex).reshape(-1)
        if vec.size != self.dimension:
            raise ValueError(f"vector length {vec.size} != {self.dimension}")
        return self.j_permutation @ vec.conj()

    def conjugate_by_J(self, m) -> np.ndarray:
        """J M J^{-1} for a linear operator M (independent of the sign of J^2)."""
        a = as_complex_matrix(m)
        p = self.j_permutation
        return p @ a.conj() @ p

    def j_commutator_norm(self, x) -> float:
        """Operator norm of xJ - Jx as antilinear maps; zero iff x commutes with J."""
        a = as_complex_matrix(x)
        p = self.j_permutation
        return operator_norm(a @ p - p @ a.conj())

    def j_matrix_identity_residual(self, x) -> float:
        """Residual of the alternative reading x = J x* J*."""
        a = as_complex_matrix(x)
        return operator_norm(self.conjugate_by_J(adjoint(a)) - a)


def build_representation(config: GeometryConfig) -> Representation:
    return Representation(config)


def check_grading(rep: Representation, tol: float = DEFAULT_TOL) -> CheckReport:
    """chi^2 = 1 and [rho(a), chi] = 0 over the algebra basis."""
    m = rep.dimension
    residual = operator_norm(rep.chi @ rep.chi - np.eye(m))
    for _, _, _, blocks in rep.algebra_basis():
        residual = max(residual, operator_norm(commutator(rep.rho(blocks), rep.chi)))
    return CheckReport("grading", residual <= tol, residual)


def check_order_zero(rep: Representation, tol: float = DEFAULT_TOL) -> CheckReport:
    """Max of ||[rho(a), rho_opp(b)]|| over algebra basis pairs.

    With H = C^m and the permute-conjugate J, this vanishes exactly when
    every fiber dimension is 1; nonabelian blocks put rho_opp outside the
    commutant of rho and the report shows the (honest) nonzero residual.
    """
    basis = rep.algebra_basis()
    residual = 0.0
    for _, _, _, a in basis:
        ra = rep.rho(a)
        for _, _, _, b in basis:
            residual = max(residual, operator_norm(commutator(ra, rep.rho_opp(b))))
    return CheckReport("order_zero", residual <= tol, residual)


def check_j_squared(rep: Representation, tol: float = DEFAULT_TOL) -> CheckReport:
    """Declared j_squared against the value the permute-conjugate J realizes."""
    p = rep.j_permutation
    realized = p @ p.conj()  # J^2 as a linear map
    residual = operator_norm(realized - rep.config.j_squared * np.eye(rep.dimension))
    return CheckReport("j_squared", residual <= tol, residual)


def check_faithful(rep: Representation, tol: float = DEFAULT_TOL) -> CheckReport:
    """rho(a) = 0 forces a = 0, checked on the basis."""
    worst = min(operator_norm(rep.rho(a)) for _, _, _, a in rep.algebra_basis())
    return CheckReport("faithful", worst > tol, worst)
