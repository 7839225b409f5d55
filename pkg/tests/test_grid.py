import numpy as np
import pytest

from stokesmg.grid import GridSpec, ShapeError, StaggeredField


@pytest.mark.parametrize("n", [4, 8, 64, 256])
def test_valid_sizes(n):
    grid = GridSpec(n)
    assert grid.h * grid.n == 1.0


@pytest.mark.parametrize("n", [0, 2, 3, 6, 12, 100])
def test_invalid_sizes_rejected(n):
    with pytest.raises(ValueError):
        GridSpec(n)


def test_coarsen_chain_stops_at_four():
    grid = GridSpec(32)
    assert grid.coarsen().n == 16
    with pytest.raises(ValueError):
        GridSpec(4).coarsen()


def test_linear_space_axioms(rng):
    grid = GridSpec(8)
    x = StaggeredField.random(grid, rng)
    y = StaggeredField.random(grid, rng)
    z = 2.5 * x + y * (-0.5)
    assert np.allclose(z.u, 2.5 * x.u - 0.5 * y.u)
    assert np.allclose((x - x).p, 0.0)
    assert x.norm() == pytest.approx(np.linalg.norm(x.ravel()))
    assert (x + y).norm() <= x.norm() + y.norm() + 1e-15


def test_dot_matches_ravel(rng):
    grid = GridSpec(8)
    x = StaggeredField.random(grid, rng)
    y = StaggeredField.random(grid, rng)
    assert x.dot(y) == pytest.approx(float(x.ravel() @ y.ravel()))


def test_shape_check():
    grid = GridSpec(8)
    bad = StaggeredField(np.zeros((8, 8)), np.zeros((8, 8)), np.zeros((4, 4)))
    with pytest.raises(ShapeError):
        bad.check_on(grid)


def test_project_constants(rng):
    grid = GridSpec(8)
    x = StaggeredField.random(grid, rng)
    y = x.project_constants()
    assert abs(y.u.mean()) < 1e-15
    assert abs(y.v.mean()) < 1e-15
    assert abs(y.p.mean()) < 1e-15


def test_vector_round_trip(rng):
    grid = GridSpec(8)
    x = StaggeredField.random(grid, rng)
    y = StaggeredField.from_vector(grid, x.ravel())
    assert np.array_equal(x.u, y.u) and np.array_equal(x.v, y.v) and np.array_equal(x.p, y.p)
    with pytest.raises(ShapeError):
        StaggeredField.from_vector(grid, np.zeros(5))
