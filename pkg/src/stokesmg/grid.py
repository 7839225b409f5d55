"""Staggered periodic grids and the block velocity/pressure unknown.

Unknown placement on the unit square with n x n cells of width h = 1/n:

* ``u[i, j]``  lives at vertical-edge midpoints  ``(i*h, (j+1/2)*h)``
* ``v[i, j]``  lives at horizontal-edge midpoints ``((i+1/2)*h, j*h)``
* ``p[i, j]``  lives at cell centers             ``((i+1/2)*h, (j+1/2)*h)``

All arrays are n x n with periodic index wrap (no ghost layers); axis 0 is
the x direction, axis 1 the y direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GridSpec", "StaggeredField", "ShapeError"]


class ShapeError(ValueError):
    """A field's component arrays do not match the grid they are used on."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic n x n MAC grid on the unit square.

    ``h`` is always ``1.0 / n`` (IEEE double division); every stencil scaling
    derives from this value so that ``h * n == 1`` holds exactly for the
    power-of-two sizes accepted here.
    """

    n: int

    def __post_init__(self) -> None:
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 4, got n={self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def coarsen(self) -> "GridSpec":
        if self.n <= 4:
            raise ValueError(f"cannot coarsen a {self.n}x{self.n} grid below 4x4")
        return GridSpec(self.n // 2)


@dataclass
class StaggeredField:
    """The block unknown (u, v, p) on a periodic MAC grid.

    Behaves as a vector in R^(3n^2) (or C^(3n^2) for Fourier-mode tests):
    addition and scalar multiplication are componentwise, and ``norm`` is the
    Euclidean norm over all entries.  The norm accumulates with numpy's
    pairwise summation per component in C order, combining the three
    component sums as u, then v, then p.
    """

    u: np.ndarray
    v: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, grid: GridSpec, dtype=np.float64) -> "StaggeredField":
        shape = (grid.n, grid.n)
        return cls(np.zeros(shape, dtype), np.zeros(shape, dtype), np.zeros(shape, dtype))

    @classmethod
    def random(cls, grid: GridSpec, rng: np.random.Generator) -> "StaggeredField":
        """Entries uniform in [-0.5, 0.5), drawn u, then v, then p."""
        shape = (grid.n, grid.n)
        return cls(rng.random(shape) - 0.5, rng.random(shape) - 0.5, rng.random(shape) - 0.5)

    def check_on(self, grid: GridSpec) -> None:
        shape = (grid.n, grid.n)
        for name, comp in (("u", self.u), ("v", self.v), ("p", self.p)):
            if comp.shape != shape:
                raise ShapeError(
                    f"component {name} has shape {comp.shape}, expected {shape}"
                )

    def copy(self) -> "StaggeredField":
        return StaggeredField(self.u.copy(), self.v.copy(), self.p.copy())

    def __add__(self, other: "StaggeredField") -> "StaggeredField":
        return StaggeredField(self.u + other.u, self.v + other.v, self.p + other.p)

    def __sub__(self, other: "StaggeredField") -> "StaggeredField":
        return StaggeredField(self.u - other.u, self.v - other.v, self.p - other.p)

    def __mul__(self, a) -> "StaggeredField":
        return StaggeredField(a * self.u, a * self.v, a * self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "StaggeredField":
        return self * (-1.0)

    def norm(self) -> float:
        return float(
            np.sqrt(
                np.vdot(self.u, self.u).real
                + np.vdot(self.v, self.v).real
                + np.vdot(self.p, self.p).real
            )
        )

    def dot(self, other: "StaggeredField") -> complex | float:
        """Euclidean inner product; conjugates self for complex fields."""
        s = np.vdot(self.u, other.u) + np.vdot(self.v, other.v) + np.vdot(self.p, other.p)
        return complex(s) if np.iscomplexobj(self.u) or np.iscomplexobj(other.u) else float(s.real)

    def project_constants(self) -> "StaggeredField":
        """Subtract the mean from every component (periodic nullspace hygiene)."""
        return StaggeredField(
            self.u - self.u.mean(), self.v - self.v.mean(), self.p - self.p.mean()
        )

    def ravel(self) -> np.ndarray:
        """Flatten to a single vector, blocks ordered u, v, p, C order each."""
        return np.concatenate([self.u.ravel(), self.v.ravel(), self.p.ravel()])

    @classmethod
    def from_vector(cls, grid: GridSpec, vec: np.ndarray) -> "StaggeredField":
        n2 = grid.n * grid.n
        if vec.size != 3 * n2:
            raise ShapeError(f"vector of size {vec.size} does not hold 3*{n2} entries")
        shape = (grid.n, grid.n)
        return cls(
            vec[:n2].reshape(shape).copy(),
            vec[n2 : 2 * n2].reshape(shape).copy(),
            vec[2 * n2 :].reshape(shape).copy(),
        )
