"""Sparse assembly of the periodic staggered operators plus exact solvers.

The assembled matrices are built from Kronecker products of 1D periodic
difference matrices, deliberately independent of the roll-based stencil code
in :mod:`stokesmg.operators`, so they can serve as oracles for it.  The same
matrices back the deflated exact solves used on coarse multigrid levels.

Vector layout matches :meth:`stokesmg.grid.StaggeredField.ravel`: blocks
ordered u, v, p, each n x n flattened in C order with axis 0 = x.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import GridSpec, StaggeredField

__all__ = [
    "assemble_stokes",
    "assemble_mass",
    "assemble_mass_schur",
    "InconsistentRhsError",
    "exact_solve",
    "coarsest_solve",
]

# Dense bordered LU up to this grid size; sparse LU beyond.  3*32^2+3 unknowns
# is ~75 MB as a dense factor, which covers every two-grid run in the tables.
_DENSE_LIMIT = 32


class InconsistentRhsError(ValueError):
    """Right-hand side has a component outside the operator range."""

    def __init__(self, magnitude: float, scale: float):
        self.magnitude = magnitude
        self.scale = scale
        super().__init__(
            f"right-hand side mean components have magnitude {magnitude:.3e} "
            f"(tolerance scale {scale:.3e}); the periodic system is inconsistent"
        )


def _shift(n: int) -> sp.csr_matrix:
    """Periodic shift S with (S w)[i] = w[i+1 mod n]."""
    return sp.eye(n, k=1, format="lil") + sp.eye(n, k=-(n - 1), format="lil")


@lru_cache(maxsize=None)
def _blocks(n: int):
    h = 1.0 / n
    eye = sp.eye(n, format="csr")
    s = _shift(n).tocsr()
    lap1 = (2.0 * eye - s - s.T) / (h * h)
    dplus = (s - eye) / h  # forward difference w[i+1]-w[i]
    dminus = (eye - s.T) / h  # backward difference w[i]-w[i-1]

    a1 = sp.kron(lap1, eye) + sp.kron(eye, lap1)  # -Laplacian on one component
    btx = sp.kron(dminus, eye)  # gradient_x: cells -> u-points
    bty = sp.kron(eye, dminus)  # gradient_y: cells -> v-points
    bx = -sp.kron(dplus, eye)  # -d/dx: u-points -> cells
    by = -sp.kron(eye, dplus)  # -d/dy: v-points -> cells
    return a1.tocsr(), btx.tocsr(), bty.tocsr(), bx.tocsr(), by.tocsr()


def assemble_stokes(grid: GridSpec) -> sp.csr_matrix:
    """Assembled saddle matrix [[A, 0, Bt_x], [0, A, Bt_y], [B_x, B_y, 0]]."""
    a1, btx, bty, bx, by = _blocks(grid.n)
    zero = sp.csr_matrix(a1.shape)
    zpp = sp.csr_matrix((grid.n**2, grid.n**2))
    return sp.bmat([[a1, zero, btx], [zero, a1, bty], [bx, by, zpp]], format="csr")


def assemble_mass(grid: GridSpec) -> sp.csr_matrix:
    """Assembled 9-point mass matrix Q on one component."""
    n, h = grid.n, grid.h
    s = _shift(n).tocsr()
    q1 = 4.0 * sp.eye(n, format="csr") + s + s.T
    return (h * h / 36.0) * sp.kron(q1, q1, format="csr")


def assemble_mass_schur(grid: GridSpec) -> sp.csr_matrix:
    """Assembled Schur complement B * blockdiag(Q, Q) * B^T at cell centers."""
    _, btx, bty, bx, by = _blocks(grid.n)
    q = assemble_mass(grid)
    return (bx @ q @ btx + by @ q @ bty).tocsr()


def _nullspace_basis(n: int) -> np.ndarray:
    """Orthonormal basis (3 rows) of the constant-per-component nullspace."""
    m = n * n
    basis = np.zeros((3, 3 * m))
    scale = 1.0 / np.sqrt(m)
    for k in range(3):
        basis[k, k * m : (k + 1) * m] = scale
    return basis


@lru_cache(maxsize=None)
def _dense_factor(n: int):
    grid = GridSpec(n)
    mat = assemble_stokes(grid).toarray()
    basis = _nullspace_basis(n)
    m = mat.shape[0]
    bordered = np.zeros((m + 3, m + 3))
    bordered[:m, :m] = mat
    bordered[:m, m:] = basis.T
    bordered[m:, :m] = basis
    return scipy.linalg.lu_factor(bordered), basis


@lru_cache(maxsize=None)
def _sparse_factor(n: int):
    grid = GridSpec(n)
    mat = assemble_stokes(grid)
    basis = sp.csr_matrix(_nullspace_basis(n))
    bordered = sp.bmat(
        [[mat, basis.T], [basis, sp.csr_matrix((3, 3))]], format="csc"
    )
    return spla.splu(bordered), _nullspace_basis(n)


def exact_solve(
    grid: GridSpec,
    b: StaggeredField,
    consistency_tol: float | None = 1e-6,
) -> StaggeredField:
    """Solve L x = b exactly with the three constant modes deflated.

    The bordered system [[L, N^T], [N, 0]] is factorized once per grid size
    (dense LU up to 32x32, sparse LU beyond) and cached.  The returned field
    has zero mean in each component and satisfies L x = P b, with P the
    orthogonal projection onto the operator range.

    Raises :class:`InconsistentRhsError` when b has mean components larger
    than ``consistency_tol`` times its norm.  Pass ``consistency_tol=None``
    to skip the check: multigrid cycles do that for restricted residuals,
    which are mean-free by construction but can shrink to the roundoff floor
    deep in a W-cycle recursion, where any relative offset test misfires.
    """
    b.check_on(grid)
    rhs = b.ravel()
    scale = float(np.linalg.norm(rhs))
    if scale == 0.0:
        return StaggeredField.zeros(grid)

    if grid.n <= _DENSE_LIMIT:
        factor, basis = _dense_factor(grid.n)
    else:
        factor, basis = _sparse_factor(grid.n)

    if consistency_tol is not None:
        offset = float(np.linalg.norm(basis @ rhs))
        if offset > consistency_tol * scale:
            raise InconsistentRhsError(offset, consistency_tol * scale)

    augmented = np.concatenate([rhs, np.zeros(3)])
    if grid.n <= _DENSE_LIMIT:
        sol = scipy.linalg.lu_solve(factor, augmented)
    else:
        sol = factor.solve(augmented)
    return StaggeredField.from_vector(grid, sol[:-3])


def coarsest_solve(grid: GridSpec, b: StaggeredField) -> StaggeredField:
    """Exact deflated solve on the 4x4 coarsest grid."""
    if grid.n != 4:
        raise ValueError(f"coarsest grid must be 4x4, got n={grid.n}")
    return exact_solve(grid, b)
