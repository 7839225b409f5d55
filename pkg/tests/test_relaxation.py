import numpy as np
import pytest

from stokesmg.grid import GridSpec, StaggeredField
from stokesmg.lfa import fourier_mode, mode_coefficients, relaxation_symbol
from stokesmg.operators import apply_b, apply_stokes, residual
from stokesmg.relaxation import (
    MASS_SCHUR_DIAG,
    PRESETS,
    RelaxParams,
    RelaxScheme,
    SchurSolveError,
    solve_mass_schur,
    sweep,
)

from conftest import random_field

ALL_SCHEMES = list(RelaxScheme)


def test_presets_match_documented_values():
    assert PRESETS[RelaxScheme.QDR] == RelaxParams(omega=0.75)
    assert PRESETS[RelaxScheme.QBSR_EXACT] == RelaxParams(omega=0.75, alpha=1.0)
    p = PRESETS[RelaxScheme.QIBSR]
    assert p.alpha == 1.4 and p.omega == pytest.approx(0.75 * 1.4) and p.omega_j == 1.0
    p = PRESETS[RelaxScheme.QSIGMA_UZAWA]
    assert p.omega == 1.0 and p.alpha == pytest.approx(4.0 / 3.0) and p.sigma == 0.5


def test_uzawa_preset_satisfies_closed_form_relations():
    p = PRESETS[RelaxScheme.QSIGMA_UZAWA]
    assert p.sigma == pytest.approx(1.0 / (3.0 * p.omega - 1.0), abs=1e-15)
    assert p.alpha == pytest.approx(
        8.0 * p.omega**2 / (3.0 * (3.0 * p.omega - 1.0)), abs=1e-15
    )


def test_positive_parameters_required():
    with pytest.raises(ValueError):
        RelaxParams(omega=0.0)
    with pytest.raises(ValueError):
        RelaxParams(sigma=-1.0)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_exact_solution_is_fixed_point(scheme, rng):
    grid = GridSpec(8)
    x = random_field(grid, rng).project_constants()
    b = apply_stokes(grid, x)
    out = sweep(scheme, grid, PRESETS[scheme], b, x)
    assert (out - x).norm() < 1e-11 * max(x.norm(), 1.0)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_error_propagation_is_linear(scheme, rng):
    grid = GridSpec(8)
    b = StaggeredField.zeros(grid)
    x = random_field(grid, rng)
    y = random_field(grid, rng)
    a, c = 0.7, -1.9
    lhs = sweep(scheme, grid, PRESETS[scheme], b, a * x + c * y)
    rhs = a * sweep(scheme, grid, PRESETS[scheme], b, x) + c * sweep(
        scheme, grid, PRESETS[scheme], b, y
    )
    assert (lhs - rhs).norm() < 1e-10 * (lhs.norm() + 1.0)


@pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.value)
def test_sweep_matches_symbol_on_fourier_modes(scheme, rng):
    """One sweep on b = 0 multiplies each mode's coefficients by S(theta)."""
    grid = GridSpec(16)
    params = PRESETS[scheme]
    b = StaggeredField.zeros(grid)
    for k1, k2 in [(1, 0), (0, 5), (3, 7), (8, 8), (12, 2), (15, 15)]:
        coeffs = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        mode = fourier_mode(grid, k1, k2, coeffs)
        out = sweep(scheme, grid, params, b, mode)
        got = mode_coefficients(grid, out, k1, k2)
        sym = relaxation_symbol(
            scheme, params, 2 * np.pi * k1 / 16, 2 * np.pi * k2 / 16, h=grid.h
        )
        want = sym @ coeffs
        assert np.abs(got - want).max() < 1e-10 * max(np.abs(want).max(), 1.0), (
            f"symbol mismatch at k=({k1},{k2})"
        )


def test_qdr_damps_mode_by_minus_one_third():
    """At theta = (pi/2, pi/2), m_r = 16/9 and omega = 3/4 gives the triple
    eigenvalue 1 - (3/4)(16/9) = -1/3.

    The symbol is defective there (triple eigenvalue with a nilpotent part),
    so a generic mode is not uniformly scaled; the sweep must scale an
    actual eigenvector mode by exactly -1/3 and the one-sweep mode map must
    have the triple eigenvalue -1/3.
    """
    grid = GridSpec(16)
    b = StaggeredField.zeros(grid)
    params = PRESETS[RelaxScheme.QDR]
    sym = relaxation_symbol(RelaxScheme.QDR, params, np.pi / 2, np.pi / 2, h=grid.h)
    lam = -1.0 / 3.0
    assert np.allclose(np.linalg.eigvals(sym), lam, atol=1e-10)
    # an exact eigenvector of the defective symbol: null vector of (S - lam I)
    _, _, vh = np.linalg.svd(sym - lam * np.eye(3))
    vec = vh[-1].conj()
    mode = fourier_mode(grid, 4, 4, tuple(vec))
    out = sweep(RelaxScheme.QDR, grid, params, b, mode)
    assert (out - lam * mode).norm() < 1e-10 * mode.norm()


def test_qbsr_velocity_mode_scaled_by_one_third():
    # at theta = (pi, pi): m_r = 8/9 and the m_r-eigenvector of the symbol is
    # scaled by 1 - (3/4)(8/9) = 1/3
    grid = GridSpec(16)
    params = PRESETS[RelaxScheme.QBSR_EXACT]
    sym = relaxation_symbol(RelaxScheme.QBSR_EXACT, params, np.pi, np.pi, h=grid.h)
    vals, vecs = np.linalg.eig(sym)
    k = int(np.argmin(np.abs(vals - 1.0 / 3.0)))
    assert abs(vals[k] - 1.0 / 3.0) < 1e-10
    mode = fourier_mode(grid, 8, 8, tuple(vecs[:, k]))
    out = sweep(RelaxScheme.QBSR_EXACT, grid, params, StaggeredField.zeros(grid), mode)
    assert (out - (1.0 / 3.0) * mode).norm() < 1e-9 * mode.norm()


@pytest.mark.parametrize("omega", [1.0, 0.75])
def test_qbsr_divergence_consistency(omega, rng):
    """After one exact sweep, B u_new = (1-omega) B u_old + omega b_p."""
    grid = GridSpec(8)
    params = RelaxParams(omega=omega, alpha=1.3)
    y = random_field(grid, rng).project_constants()
    b = apply_stokes(grid, 2.0 * y)  # consistent, mean-free pressure block
    x = random_field(grid, rng)
    out = sweep(RelaxScheme.QBSR_EXACT, grid, params, b, x)
    b_old = apply_b(grid, x.u, x.v)
    b_new = apply_b(grid, out.u, out.v)
    want = (1.0 - omega) * b_old + omega * b.p
    assert np.abs(b_new - want).max() < 1e-9 * max(np.abs(b.p).max(), 1.0)


def _keep_high_frequencies(field: StaggeredField) -> StaggeredField:
    """Zero every T_low Fourier coefficient of each component (n = 16).

    Sweeps act mode-by-mode, so on the high-frequency subspace the power
    iteration converges to the smoothing factor; without the filter,
    roundoff reseeds slowly-decaying low modes and the iteration drifts to
    the all-frequency spectral radius instead.
    """
    n = field.u.shape[0]
    k = np.arange(n)
    low_1d = (k <= n // 4 - 1) | (k >= 3 * n // 4)
    low = low_1d[:, None] & low_1d[None, :]

    def filt(w):
        coef = np.fft.fft2(w)
        coef[low] = 0.0
        return np.fft.ifft2(coef)

    return StaggeredField(filt(field.u), filt(field.v), filt(field.p))


def test_qdr_asymptotic_sweep_reduction(rng):
    """100 Q-DR sweeps on the high-frequency error subspace contract by
    <= 1/3 + 0.02 per sweep asymptotically (power-iteration estimate)."""
    grid = GridSpec(16)
    params = PRESETS[RelaxScheme.QDR]
    b = StaggeredField.zeros(grid)
    x = _keep_high_frequencies(random_field(grid, rng, complex_valued=True))
    x = x * (1.0 / residual(grid, b, x).norm())
    ratio = 1.0
    for _ in range(100):
        x = _keep_high_frequencies(sweep(RelaxScheme.QDR, grid, params, b, x))
        ratio = residual(grid, b, x).norm()
        x = x * (1.0 / ratio)
    assert ratio <= 1.0 / 3.0 + 0.02


def test_mass_schur_diagonal_constant():
    # one weighted-Jacobi Schur step divides by this diagonal; it is 4/3 on
    # every periodic grid (cross-checked against assembly in the acceptance suite)
    assert MASS_SCHUR_DIAG == pytest.approx(4.0 / 3.0, abs=1e-15)


def test_schur_solve_reaches_tolerance(rng):
    grid = GridSpec(16)
    q = rng.standard_normal((16, 16))
    q -= q.mean()
    from stokesmg.relaxation import _schur_apply

    sol = solve_mass_schur(grid, q)
    res = _schur_apply(grid, RelaxScheme.QBSR_EXACT, sol) - (q - q.mean())
    assert np.linalg.norm(res) < 1e-10 * np.linalg.norm(q)
    assert abs(sol.mean()) < 1e-13


def test_schur_solve_iteration_cap(rng):
    grid = GridSpec(16)
    q = rng.standard_normal((16, 16))
    with pytest.raises(SchurSolveError) as info:
        solve_mass_schur(grid, q, maxiter=2)
    assert info.value.achieved > 0.0


def test_baseline_requires_baseline_tag(rng):
    from stokesmg.relaxation import sweep_baseline

    grid = GridSpec(8)
    x = StaggeredField.zeros(grid)
    with pytest.raises(ValueError):
        sweep_baseline(grid, RelaxScheme.QDR, RelaxParams(), x, x)
