"""Matrix-free periodic stencil applications for the staggered Stokes system.

Every operator here wraps indices periodically via ``np.roll`` and works for
real or complex component arrays.  Block convention for the saddle system
``[[A, B^T], [B, 0]]``: ``A`` is the 5-point vector Laplacian, ``B`` is the
negative discrete divergence and ``B^T`` the staggered pressure gradient,
so that B = -(gradient)^T under the unweighted Euclidean inner product.
"""
from __future__ import annotations

import numpy as np

from .grid import GridSpec, StaggeredField

__all__ = [
    "neg_laplacian",
    "apply_mass",
    "apply_pressure_laplacian",
    "apply_gradient",
    "apply_divergence",
    "apply_b",
    "apply_bt",
    "apply_stokes",
    "residual",
]


def _check_component(grid: GridSpec, w: np.ndarray) -> None:
    if w.shape != (grid.n, grid.n):
        from .grid import ShapeError

        raise ShapeError(f"component has shape {w.shape}, expected {(grid.n, grid.n)}")


def neg_laplacian(grid: GridSpec, w: np.ndarray) -> np.ndarray:
    """5-point -Laplacian (1/h^2)*[-1; -1, 4, -1; -1] on one component."""
    _check_component(grid, w)
    return (
        4.0 * w
        - np.roll(w, 1, axis=0)
        - np.roll(w, -1, axis=0)
        - np.roll(w, 1, axis=1)
        - np.roll(w, -1, axis=1)
    ) / (grid.h * grid.h)


def apply_mass(grid: GridSpec, w: np.ndarray) -> np.ndarray:
    """9-point bilinear mass stencil (h^2/36)*{1,4,1; 4,16,4; 1,4,1}.

    Applied as the tensor product (1,4,1) x (1,4,1); rows sum to h^2.
    """
    _check_component(grid, w)
    wx = 4.0 * w + np.roll(w, 1, axis=0) + np.roll(w, -1, axis=0)
    wy = 4.0 * wx + np.roll(wx, 1, axis=1) + np.roll(wx, -1, axis=1)
    return (grid.h * grid.h / 36.0) * wy


def apply_pressure_laplacian(grid: GridSpec, q: np.ndarray) -> np.ndarray:
    """Cell-centered 5-point -Laplacian A_p (same stencil as the velocity one)."""
    return neg_laplacian(grid, q)


def apply_gradient(grid: GridSpec, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Staggered half-shift gradient: cell centers -> (u-points, v-points)."""
    _check_component(grid, q)
    gx = (q - np.roll(q, 1, axis=0)) / grid.h
    gy = (q - np.roll(q, 1, axis=1)) / grid.h
    return gx, gy


def apply_divergence(grid: GridSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Staggered divergence: edge midpoints -> cell centers."""
    _check_component(grid, u)
    _check_component(grid, v)
    return (np.roll(u, -1, axis=0) - u + np.roll(v, -1, axis=1) - v) / grid.h


def apply_b(grid: GridSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """B (negative divergence), the lower-left block of the saddle system."""
    return -apply_divergence(grid, u, v)


def apply_bt(grid: GridSpec, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """B^T (pressure gradient), the upper-right block of the saddle system."""
    return apply_gradient(grid, q)


def apply_stokes(grid: GridSpec, x: StaggeredField) -> StaggeredField:
    """Apply the full staggered Stokes operator to a field."""
    x.check_on(grid)
    gx, gy = apply_gradient(grid, x.p)
    return StaggeredField(
        neg_laplacian(grid, x.u) + gx,
        neg_laplacian(grid, x.v) + gy,
        apply_b(grid, x.u, x.v),
    )


def residual(grid: GridSpec, b: StaggeredField, x: StaggeredField) -> StaggeredField:
    """Defect b - L*x."""
    b.check_on(grid)
    return b - apply_stokes(grid, x)
