"""Dense complex matrix primitives shared by every other module.

Everything here works on plain ``numpy.ndarray`` of dtype complex128.
All target instances are tiny (m of order 10), so the routines favour
determinism and clarity over scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a finite, 2-d complex128 array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix entries must be finite")
    return a


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_complex_matrix(m).conj().T


def commutator(a, b) -> np.ndarray:
    """AB - BA for square matrices of equal dimension."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"commutator needs equal square matrices, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    """AB + BA for square matrices of equal dimension."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"anticommutator needs equal square matrices, got {a.shape} and {b.shape}")
    return a @ b + b @ a


def operator_norm(m) -> float:
    """Largest singular value; zero exactly when the matrix is zero."""
    a = as_complex_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_spectrum(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending, with multiplicity.

    Raises ValueError when the input fails the Hermiticity test
    ``||M - M*|| <= tol`` (absolute, scaled by ||M|| when that is large).
    """
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("spectrum needs a square matrix")
    scale = max(1.0, operator_norm(a))
    if operator_norm(a - adjoint(a)) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.sort(np.linalg.eigvalsh(a))


def tensor_rank_one(block, dims, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``block`` factors as e (x) f with e of shape (ni, nj), f of shape (ni2, nj2).

    ``dims = (ni, nj, ni2, nj2)``; the block must be (ni*ni2) x (nj*nj2).
    Equivalent to the realigned (ni*nj) x (ni2*nj2) matrix having numerical
    rank <= 1 (rank decided relative to the largest singular value).
    """
    a = as_complex_matrix(block)
    ni, nj, ni2, nj2 = (int(d) for d in dims)
    if min(ni, nj, ni2, nj2) <= 0:
        raise ValueError("tensor factor dimensions must be positive")
    if a.shape != (ni * ni2, nj * nj2):
        raise ValueError(f"block shape {a.shape} does not match dims {dims}")
    # realign: B[(i,i2),(j,j2)] -> R[(i,j),(i2,j2)]
    r = a.reshape(ni, ni2, nj, nj2).transpose(0, 2, 1, 3).reshape(ni * nj, ni2 * nj2)
    s = np.linalg.svd(r, compute_uv=False)
    if s.size == 0 or s[0] <= tol:
        return True  # zero block
    return bool(s.size < 2 or s[1] <= tol * s[0])


@dataclass(frozen=True)
class BlockStructure:
    """Partition of {0..m-1} into consecutive blocks of the given sizes."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims or any(d <= 0 for d in self.dims):
            raise ValueError("block dims must be positive")

    @property
    def total(self) -> int:
        return sum(self.dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for d in self.dims:
            out.append(acc)
            acc += d
        return tuple(out)

    def block_slice(self, i: int) -> slice:
        off = self.offsets[i]
        return slice(off, off + self.dims[i])

    def block(self, matrix, i: int, j: int) -> np.ndarray:
        m = as_complex_matrix(matrix)
        if m.shape != (self.total, self.total):
            raise ValueError(f"matrix shape {m.shape} does not match total dimension {self.total}")
        return m[self.block_slice(i), self.block_slice(j)]

    def assemble(self, blocks: dict) -> np.ndarray:
        """Build an m x m matrix from a {(i, j): block} dict; absent blocks are zero."""
        out = np.zeros((self.total, self.total), dtype=complex)
        for (i, j), val in blocks.items():
            v = as_complex_matrix(val)
            if v.shape != (self.dims[i], self.dims[j]):
                raise ValueError(
                    f"block ({i},{j}) has shape {v.shape}, expected {(self.dims[i], self.dims[j])}"
                )
            out[self.block_slice(i), self.block_slice(j)] = v
        return out


@dataclass(frozen=True)
class RealLinearSystem:
    """Real-linear constraint system over the re/im parts of complex unknowns.

    Columns come in (re, im) pairs per complex unknown; ``labels[k]`` names
    column k as (block_index, row, col, "re"|"im").
    """

    matrix: np.ndarray
    labels: tuple[tuple[int, int, int, str], ...]

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2:
            raise ValueError("coefficient matrix must be 2-d")
        if a.shape[1] != len(self.labels):
            raise ValueError("one label per column required")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("unknown labels must be unique")
        if len(self.labels) % 2 != 0:
            raise ValueError("columns come in re/im pairs")
        object.__setattr__(self, "matrix", a)

    @property
    def unknown_count(self) -> int:
        return len(self.labels) // 2


def _rref(a: np.ndarray, tol: float) -> np.ndarray:
    """Reduced row echelon form with pivots chosen left to right."""
    a = a.copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= tol:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] / a[r, c]
        for k in range(rows):
            if k != r and abs(a[k, c]) > 0:
                a[k] = a[k] - a[k, c] * a[r]
        r += 1
    return a[:r]


def real_nullspace(system, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the kernel of a real matrix, rows = basis vectors.

    Rank is decided by singular values below ``tol`` times the largest one.
    The basis is canonicalized deterministically: reduced to echelon form
    (lexicographic pivot order), re-orthonormalized in that order, and signed
    so the first significant entry of each vector is positive.
    """
    a = system.matrix if isinstance(system, RealLinearSystem) else np.asarray(system, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-d coefficient matrix")
    nrows, ncols = a.shape
    if ncols == 0:
        return np.zeros((0, 0))
    if nrows == 0 or not np.any(np.abs(a) > 0):
        kernel = np.eye(ncols)
    else:
        _, s, vt = np.linalg.svd(a)
        cutoff = tol * s[0] if s.size else tol
        rank = int(np.sum(s > cutoff))
        kernel = vt[rank:]
    if kernel.shape[0] == 0:
        return np.zeros((0, ncols))
    basis = _rref(kernel, tol)
    # Gram-Schmidt in pivot order keeps the ordering deterministic.
    ortho = []
    for row in basis:
        v = row.copy()
        for u in ortho:
            v -= (u @ v) * u
        n = np.linalg.norm(v)
        if n > tol:
            ortho.append(v / n)
    out = np.array(ortho) if ortho else np.zeros((0, ncols))
    for v in out:
        nz = np.nonzero(np.abs(v) > tol)[0]
        if nz.size and v[nz[0]] < 0:
            v *= -1.0
    return out


def complex_to_json(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def json_to_complex(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
        raise ValueError(f"expected a {{re, im}} object, got {obj!r}")
    return complex(float(obj["re"]), float(obj["im"]))


def matrix_to_json(m) -> list:
    """Row-major nested lists of {re, im} objects."""
    a = as_complex_matrix(m)
    return [[complex_to_json(z) for z in row] for row in a]


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValueError("matrix JSON must be a non-empty list of rows")
    width = len(obj[0])
    if width == 0 or any(len(r) != width for r in obj):
        raise ValueError("matrix JSON rows must be non-empty and of equal length")
    return as_complex_matrix([[json_to_complex(z) for z in row] for row in obj])
