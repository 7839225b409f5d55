import numpy as np
import pytest

from stokesmg.assembly import assemble_mass, assemble_stokes
from stokesmg.grid import GridSpec, StaggeredField
from stokesmg.lfa import fourier_mode, mode_coefficients, stokes_symbol
from stokesmg.operators import (
    apply_b,
    apply_bt,
    apply_divergence,
    apply_gradient,
    apply_mass,
    apply_pressure_laplacian,
    apply_stokes,
    neg_laplacian,
    residual,
)

from conftest import random_field


def test_zero_maps_to_zero():
    grid = GridSpec(8)
    out = apply_stokes(grid, StaggeredField.zeros(grid))
    assert out.norm() == 0.0


def test_constant_pressure_in_nullspace():
    grid = GridSpec(8)
    x = StaggeredField.zeros(grid)
    x.p[:] = 3.7
    out = apply_stokes(grid, x)
    assert out.norm() < 1e-13


def test_full_constant_nullspace():
    grid = GridSpec(16)
    x = StaggeredField(
        np.full((16, 16), 1.3), np.full((16, 16), -0.7), np.full((16, 16), 2.2)
    )
    assert apply_stokes(grid, x).norm() < 1e-11


def test_stencil_row_sums(rng):
    grid = GridSpec(8)
    ones = np.ones((8, 8))
    assert np.allclose(apply_mass(grid, ones), grid.h**2, atol=1e-16)
    assert np.allclose(neg_laplacian(grid, ones), 0.0, atol=1e-12)
    assert np.allclose(apply_pressure_laplacian(grid, ones), 0.0, atol=1e-12)
    gx, gy = apply_gradient(grid, ones)
    assert np.allclose(gx, 0.0) and np.allclose(gy, 0.0)
    assert np.allclose(apply_divergence(grid, ones, ones), 0.0)


def test_mass_impulse_response():
    grid = GridSpec(8)
    w = np.zeros((8, 8))
    w[3, 4] = 1.0
    out = apply_mass(grid, w)
    expected = np.zeros((8, 8))
    pattern = np.array([[1, 4, 1], [4, 16, 4], [1, 4, 1]]) * grid.h**2 / 36.0
    expected[2:5, 3:6] = pattern
    assert np.allclose(out, expected, atol=1e-18)


def test_checkerboard_pressure_laplacian():
    grid = GridSpec(8)
    ii, jj = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
    q = (-1.0) ** (ii + jj)
    out = apply_pressure_laplacian(grid, q)
    assert np.allclose(out, 8.0 / grid.h**2 * q)


def test_divergence_is_negative_gradient_adjoint(rng):
    grid = GridSpec(8)
    u = rng.standard_normal((8, 8))
    v = rng.standard_normal((8, 8))
    q = rng.standard_normal((8, 8))
    lhs = np.vdot(apply_b(grid, u, v), q)
    gx, gy = apply_bt(grid, q)
    rhs = np.vdot(u, gx) + np.vdot(v, gy)
    scale = np.linalg.norm(q) * np.sqrt(np.linalg.norm(u) ** 2 + np.linalg.norm(v) ** 2)
    assert abs(lhs - rhs) < 1e-13 * scale


def test_gradient_divergence_fourier_symbol():
    grid = GridSpec(16)
    h = grid.h
    for k1, k2 in [(1, 0), (3, 7), (8, 8), (5, 12)]:
        t1, t2 = 2 * np.pi * k1 / 16, 2 * np.pi * k2 / 16
        s1, s2 = np.sin(t1 / 2), np.sin(t2 / 2)
        mode = fourier_mode(grid, k1, k2)
        gx, gy = apply_gradient(grid, mode.p)
        assert np.allclose(gx, (2j * s1 / h) * mode.u, atol=1e-10)
        assert np.allclose(gy, (2j * s2 / h) * mode.v, atol=1e-10)
        div = apply_divergence(grid, mode.u, mode.v)
        assert np.allclose(div, (2j * (s1 + s2) / h) * mode.p, atol=1e-10)


def test_sine_divergence_matches_exact_difference():
    grid = GridSpec(32)
    ii, jj = np.meshgrid(np.arange(32), np.arange(32), indexing="ij")
    u = np.sin(2 * np.pi * ii * grid.h)  # sampled at u-points x = i*h
    v = np.zeros_like(u)
    div = apply_divergence(grid, u, v)
    x_centers = (ii + 0.5) * grid.h
    expected = (np.sin(2 * np.pi * (x_centers + grid.h / 2)) - np.sin(2 * np.pi * (x_centers - grid.h / 2))) / grid.h
    assert np.allclose(div, expected, atol=1e-13)


def test_stokes_fourier_oracle(rng):
    grid = GridSpec(16)
    for _ in range(12):
        k1, k2 = 0, 0
        while (k1, k2) == (0, 0):
            k1, k2 = int(rng.integers(0, 16)), int(rng.integers(0, 16))
        coeffs = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        mode = fourier_mode(grid, k1, k2, coeffs)
        got = mode_coefficients(grid, apply_stokes(grid, mode), k1, k2)
        want = stokes_symbol(2 * np.pi * k1 / 16, 2 * np.pi * k2 / 16, h=grid.h) @ coeffs
        assert np.abs(got - want).max() < 1e-12 * max(np.abs(want).max(), 1.0)


def test_matrix_free_matches_assembly(rng):
    grid = GridSpec(8)
    mat = assemble_stokes(grid)
    for _ in range(20):
        x = random_field(grid, rng)
        direct = apply_stokes(grid, x).ravel()
        via = mat @ x.ravel()
        assert np.abs(direct - via).max() < 1e-13 * max(np.abs(via).max(), 1.0)


def test_mass_matches_assembly(rng):
    grid = GridSpec(8)
    mat = assemble_mass(grid)
    w = rng.standard_normal((8, 8))
    assert np.allclose(apply_mass(grid, w).ravel(), mat @ w.ravel(), atol=1e-15)


def test_operators_are_linear(rng):
    grid = GridSpec(8)
    x = random_field(grid, rng)
    y = random_field(grid, rng)
    a, b = 1.7, -0.3
    combo = apply_stokes(grid, a * x + b * y)
    split = a * apply_stokes(grid, x) + b * apply_stokes(grid, y)
    assert (combo - split).norm() < 1e-12 * (combo.norm() + 1.0)


def test_residual_definition(rng):
    grid = GridSpec(8)
    x = random_field(grid, rng)
    b = apply_stokes(grid, x)
    assert residual(grid, b, x).norm() < 1e-12 * b.norm()
    zero = StaggeredField.zeros(grid)
    r = residual(grid, zero, x)
    assert (r + apply_stokes(grid, x)).norm() < 1e-14 * b.norm()


def test_shape_mismatch_raises():
    from stokesmg.grid import ShapeError

    grid = GridSpec(16)
    x = StaggeredField.zeros(GridSpec(8))
    with pytest.raises(ShapeError):
        apply_stokes(grid, x)
