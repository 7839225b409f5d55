"""Acceptance gate: every shipped claim checked at its stated tolerance.

Each criterion function returns a :class:`CriterionResult`; ``run_all``
prints one pass/fail line per criterion.  The pytest acceptance module and
the ``verify`` CLI subcommand both drive this list, so the gate is identical
in both entry points.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .assembly import assemble_mass_schur, assemble_stokes
from .grid import GridSpec, StaggeredField
from .lfa import (
    eig3,
    fourier_mode,
    m_r_range,
    m_theta,
    mode_coefficients,
    optimize_params,
    smoothing_factor,
    stokes_symbol,
    uzawa_derived_params,
)
from .multigrid import CycleKind, CycleSpec, measure_rho, prolong, restrict
from .operators import (
    apply_divergence,
    apply_gradient,
    apply_mass,
    apply_pressure_laplacian,
    apply_stokes,
)
from .relaxation import PRESETS, RelaxScheme

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.index:2d} ({self.name}): {self.details} [{self.seconds:.1f}s]"


def _check(entries) -> tuple[bool, str]:
    """entries: iterable of (label, measured, expected, tol)."""
    ok = True
    parts = []
    for label, measured, expected, tol in entries:
        good = abs(measured - expected) <= tol
        ok &= good
        parts.append(f"{label}={measured:.4f} (want {expected:.4f}±{tol:g})")
    return ok, "; ".join(parts)


def criterion_lfa_closed_forms() -> tuple[bool, str]:
    cases = [
        ("qdr", RelaxScheme.QDR, 1.0 / 3.0),
        ("qbsr", RelaxScheme.QBSR_EXACT, 1.0 / 3.0),
        ("quzawa", RelaxScheme.QSIGMA_UZAWA, 0.5774),
    ]
    entries = []
    budget_ok = True
    for label, scheme, expected in cases:
        t0 = time.perf_counter()
        mu = smoothing_factor(scheme, PRESETS[scheme], resolution=256).mu
        budget_ok &= (time.perf_counter() - t0) < 5.0
        entries.append((label, mu, expected, 2e-3))
    ok, detail = _check(entries)
    return ok and budget_ok, detail + ("" if budget_ok else "; runtime budget 5s exceeded")


def criterion_uzawa_parameter_relations() -> tuple[bool, str]:
    mu_target = 0.5774
    lo = 1.0 / (3.0 * mu_target) + 1e-3
    hi = 2.0 / (3.0 * (1.0 - mu_target)) - 1e-3
    worst = 0.0
    for omega in np.linspace(lo, hi, 10):
        params = uzawa_derived_params(float(omega))
        mu = smoothing_factor(RelaxScheme.QSIGMA_UZAWA, params, resolution=256).mu
        worst = max(worst, abs(mu - mu_target))
    return worst <= 5e-3, f"max|mu - 0.5774| over 10 derived omegas = {worst:.2e} (tol 5e-3)"


def criterion_mr_range() -> tuple[bool, str]:
    lo, hi = m_r_range(1024)
    ok = abs(lo - 8.0 / 9.0) <= 1e-6 and abs(hi - 16.0 / 9.0) <= 1e-6
    return ok, f"m_r in [{lo:.9f}, {hi:.9f}] (want [8/9, 16/9] ± 1e-6)"


def _measured_rho(scheme: RelaxScheme, kind: CycleKind, n: int, nu: int, seed: int = 1234) -> float:
    nu1 = (nu + 1) // 2
    spec = CycleSpec.preset(scheme, kind=kind, nu1=nu1, nu2=nu - nu1)
    return measure_rho(spec, GridSpec(n), seed=seed).rho


def criterion_qdr_convergence() -> tuple[bool, str]:
    t0 = time.perf_counter()
    entries = []
    for nu, expected in ((1, 0.328), (2, 0.109), (3, 0.038)):
        rho = _measured_rho(RelaxScheme.QDR, CycleKind.TWO_GRID, 32, nu)
        entries.append((f"tg32 nu{nu}", rho, expected, 0.02))
    for nu, expected in ((1, 0.324), (2, 0.108)):
        rho = _measured_rho(RelaxScheme.QDR, CycleKind.V, 128, nu)
        entries.append((f"v128 nu{nu}", rho, expected, 0.03))
    ok, detail = _check(entries)
    elapsed = time.perf_counter() - t0
    if elapsed >= 60.0:
        return False, detail + f"; runtime {elapsed:.0f}s exceeded 60s budget"
    return ok, detail


def criterion_qibsr_convergence() -> tuple[bool, str]:
    entries = []
    for nu, expected in ((1, 0.326), (2, 0.109)):
        rho = _measured_rho(RelaxScheme.QIBSR, CycleKind.TWO_GRID, 64, nu)
        entries.append((f"tg64 nu{nu}", rho, expected, 0.02))
    for nu, expected in ((1, 0.326), (2, 0.109)):
        rho = _measured_rho(RelaxScheme.QIBSR, CycleKind.W, 128, nu)
        entries.append((f"w128 nu{nu}", rho, expected, 0.02))
    rho = _measured_rho(RelaxScheme.QIBSR, CycleKind.V, 256, 2)
    entries.append(("v256 nu2", rho, 0.178, 0.04))
    return _check(entries)


def criterion_quzawa_convergence() -> tuple[bool, str]:
    entries = []
    for nu, expected in ((1, 0.562), (2, 0.322)):
        rho = _measured_rho(RelaxScheme.QSIGMA_UZAWA, CycleKind.TWO_GRID, 32, nu)
        entries.append((f"tg32 nu{nu}", rho, expected, 0.02))
    for nu, expected in ((1, 0.558), (4, 0.107)):
        rho = _measured_rho(RelaxScheme.QSIGMA_UZAWA, CycleKind.W, 256, nu)
        entries.append((f"w256 nu{nu}", rho, expected, 0.02))
    ok, detail = _check(entries)
    rho_v = _measured_rho(RelaxScheme.QSIGMA_UZAWA, CycleKind.V, 256, 1)
    degraded = rho_v > 0.65
    detail += f"; v256 nu1={rho_v:.4f} (want > 0.65)"
    return ok and degraded, detail


def criterion_baseline_optima() -> tuple[bool, str]:
    entries = []
    for label, scheme, expected in (
        ("dwj", RelaxScheme.DWJ_BASELINE, 0.6),
        ("dibsr", RelaxScheme.DIAG_IBSR_BASELINE, 0.6),
        ("duzawa", RelaxScheme.DIAG_SIGMA_UZAWA_BASELINE, 0.7746),
    ):
        _, mu = optimize_params(scheme)
        entries.append((label, mu, expected, 5e-3))
    return _check(entries)


def criterion_fourier_oracle() -> tuple[bool, str]:
    grid = GridSpec(16)
    h = grid.h
    rng = np.random.default_rng(2024)
    worst = 0.0

    def rel(err, scale):
        return float(err) / max(float(scale), 1e-300)

    for _ in range(10):
        k1, k2 = 0, 0
        while (k1, k2) == (0, 0):
            k1, k2 = int(rng.integers(0, 16)), int(rng.integers(0, 16))
        t1, t2 = 2 * np.pi * k1 / 16, 2 * np.pi * k2 / 16
        s1, s2 = np.sin(t1 / 2), np.sin(t2 / 2)

        # full Stokes operator vs the 3x3 symbol, random coefficients
        coeffs = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        mode = fourier_mode(grid, k1, k2, coeffs)
        got = mode_coefficients(grid, apply_stokes(grid, mode), k1, k2)
        want = stokes_symbol(t1, t2, h=h) @ coeffs
        worst = max(worst, rel(np.abs(got - want).max(), np.abs(want).max()))

        # scalar stencils vs their scalar symbols on unit modes
        unit = fourier_mode(grid, k1, k2)
        q_sym = (h * h / 9.0) * (2 + np.cos(t1)) * (2 + np.cos(t2))
        worst = max(
            worst, rel(np.abs(apply_mass(grid, unit.p) - q_sym * unit.p).max(), abs(q_sym))
        )
        ap_sym = 4.0 * m_theta(t1, t2) / (h * h)
        worst = max(
            worst,
            rel(np.abs(apply_pressure_laplacian(grid, unit.p) - ap_sym * unit.p).max(), abs(ap_sym)),
        )
        gx, gy = apply_gradient(grid, unit.p)
        worst = max(worst, rel(np.abs(gx - (2j * s1 / h) * unit.u).max(), abs(2 * s1 / h) + 1))
        worst = max(worst, rel(np.abs(gy - (2j * s2 / h) * unit.v).max(), abs(2 * s2 / h) + 1))
        div = apply_divergence(grid, unit.u, unit.v)
        div_sym = 2j * (s1 + s2) / h
        worst = max(worst, rel(np.abs(div - div_sym * unit.p).max(), abs(div_sym) + 1))
    return worst < 1e-12, f"max relative operator-vs-symbol error = {worst:.2e} (tol 1e-12)"


def criterion_transfer_adjointness() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    const_ok = True
    for n in (16, 32, 64):
        fine = GridSpec(n)
        coarse = GridSpec(n // 2)
        for _ in range(10):
            x = StaggeredField.random(fine, rng)
            y = StaggeredField.random(coarse, rng)
            lhs = restrict(x).dot(y)
            rhs = 0.25 * x.dot(prolong(y))
            scale = x.norm() * y.norm()
            worst = max(worst, abs(lhs - rhs) / scale)
        const = StaggeredField(
            np.full((n, n), 1.7), np.full((n, n), -0.3), np.full((n, n), 2.5)
        )
        rc = restrict(const)
        const_ok &= (
            np.allclose(rc.u, 1.7, atol=1e-14)
            and np.allclose(rc.v, -0.3, atol=1e-14)
            and np.allclose(rc.p, 2.5, atol=1e-14)
        )
    ok = worst < 1e-13 and const_ok
    return ok, (
        f"max |<Rx,y> - (1/4)<x,Py>|/scale = {worst:.2e} (tol 1e-13); "
        f"constants preserved: {const_ok}"
    )


def criterion_sparse_assembly_oracle() -> tuple[bool, str]:
    grid = GridSpec(8)
    mat = assemble_stokes(grid)
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(20):
        x = StaggeredField.random(grid, rng)
        direct = apply_stokes(grid, x).ravel()
        via_matrix = mat @ x.ravel()
        scale = max(float(np.abs(via_matrix).max()), 1e-300)
        worst = max(worst, float(np.abs(direct - via_matrix).max()) / scale)
    return worst < 1e-13, f"max matrix-free vs assembled error = {worst:.2e} (tol 1e-13)"


def criterion_schur_diagonal() -> tuple[bool, str]:
    worst = 0.0
    for n in (4, 8):
        diag = assemble_mass_schur(GridSpec(n)).diagonal()
        worst = max(worst, float(np.abs(diag - 4.0 / 3.0).max()))
    return worst <= 1e-14, f"max |diag(B Q B^T) - 4/3| = {worst:.2e} (tol 1e-14)"


def criterion_eig3_oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(31337)
    mats = rng.standard_normal((1000, 3, 3)) + 1j * rng.standard_normal((1000, 3, 3))
    mine = eig3(mats)
    ref = np.linalg.eigvals(mats)
    order = np.lexsort((ref.imag, ref.real), axis=-1)
    ref = np.take_along_axis(ref, order, axis=-1)
    worst = float(np.abs(mine - ref).max())
    return worst < 1e-9, f"max eig3 vs LAPACK root distance = {worst:.2e} (tol 1e-9)"


CRITERIA = [
    ("LFA closed forms", criterion_lfa_closed_forms),
    ("Uzawa parameter relations", criterion_uzawa_parameter_relations),
    ("m_r range", criterion_mr_range),
    ("Q-DR convergence factors", criterion_qdr_convergence),
    ("Q-IBSR convergence factors", criterion_qibsr_convergence),
    ("Q-sigma-Uzawa convergence factors", criterion_quzawa_convergence),
    ("baseline optimal factors", criterion_baseline_optima),
    ("Fourier-mode oracle", criterion_fourier_oracle),
    ("transfer adjointness", criterion_transfer_adjointness),
    ("sparse-assembly oracle", criterion_sparse_assembly_oracle),
    ("Schur diagonal 4/3", criterion_schur_diagonal),
    ("eig3 oracle", criterion_eig3_oracle),
]


def run_criterion(index: int) -> CriterionResult:
    """Run one criterion by its 1-based index."""
    name, fn = CRITERIA[index - 1]
    t0 = time.perf_counter()
    passed, details = fn()
    return CriterionResult(index, name, passed, details, time.perf_counter() - t0)


def run_all(indices=None, echo=print) -> list[CriterionResult]:
    results = []
    for i in indices or range(1, len(CRITERIA) + 1):
        result = run_criterion(i)
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results
