"""Command-line front end: table reproduction, LFA scans, acceptance gate.

Subcommands
-----------
tables    measure convergence factors for configured (scheme, kind, h, nu)
          combinations; writes CSV and an aligned console table
lfa-scan  grid-search optimal parameters per scheme and compare against the
          analytic smoothing factors
verify    run the acceptance-criteria suite (exit 2 on any failure)
solve     one-off measurement run with reporting

Exit codes: 0 success, 1 usage error, 2 divergence or criterion failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import acceptance
from .config import (
    DEFAULT_KMAX,
    DEFAULT_RESOLUTION,
    DEFAULT_SEED,
    ExperimentConfig,
    RunRequest,
    UsageError,
    default_tables_config,
    expand_runs,
    parse_config,
)
from .grid import GridSpec
from .lfa import DEFAULT_SEARCH_BOXES, optimize_params, smoothing_factor
from .multigrid import CycleKind, CycleSpec, DivergenceError, measure_rho
from .relaxation import PRESETS, RelaxParams, RelaxScheme

__all__ = ["main"]

_ANALYTIC_MU = {
    RelaxScheme.QDR: 1.0 / 3.0,
    RelaxScheme.QBSR_EXACT: 1.0 / 3.0,
    RelaxScheme.QIBSR: 1.0 / 3.0,
    RelaxScheme.QSIGMA_UZAWA: math.sqrt(1.0 / 3.0),
    RelaxScheme.DWJ_BASELINE: 3.0 / 5.0,
    RelaxScheme.DIAG_IBSR_BASELINE: 3.0 / 5.0,
    RelaxScheme.DIAG_SIGMA_UZAWA_BASELINE: math.sqrt(3.0 / 5.0),
}


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


@dataclass
class ResultRow:
    experiment: str
    scheme: str
    kind: str
    n: int
    nu1: int
    nu2: int
    rho: float
    k_eff: int
    mu_pred: float
    seed: int
    wall_time: float
    status: str = "ok"

    FIELDS = (
        "experiment",
        "scheme",
        "kind",
        "h",
        "nu1",
        "nu2",
        "nu",
        "rho",
        "k_eff",
        "lfa_mu_pow_nu",
        "abs_diff",
        "status",
        "seed",
        "wall_time_s",
    )

    def record(self) -> dict:
        diverged = self.status != "ok"
        return {
            "experiment": self.experiment,
            "scheme": self.scheme,
            "kind": self.kind,
            "h": f"1/{self.n}",
            "nu1": self.nu1,
            "nu2": self.nu2,
            "nu": self.nu1 + self.nu2,
            "rho": "" if diverged else f"{self.rho:.6f}",
            "k_eff": self.k_eff,
            "lfa_mu_pow_nu": f"{self.mu_pred:.6f}",
            "abs_diff": "" if diverged else f"{abs(self.rho - self.mu_pred):.6f}",
            "status": self.status,
            "seed": self.seed,
            "wall_time_s": f"{self.wall_time:.3f}",
        }


def _write_csv(path: str, rows: list[ResultRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=ResultRow.FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.record())


def _print_table(rows: list[ResultRow]) -> None:
    header = f"{'experiment':<12} {'scheme':<8} {'kind':<8} {'h':>7} {'nu':>4} {'rho_m':>10} {'mu^nu':>10} {'|diff|':>9} {'k':>4} {'status':<9}"
    print(header)
    print("-" * len(header))
    for r in rows:
        rho = f"{r.rho:.4f}" if r.status == "ok" else "-"
        diff = f"{abs(r.rho - r.mu_pred):.4f}" if r.status == "ok" else "-"
        print(
            f"{r.experiment:<12} {r.scheme:<8} {r.kind:<8} {'1/' + str(r.n):>7} "
            f"{r.nu1 + r.nu2:>4} {rho:>10} {r.mu_pred:>10.4f} {diff:>9} {r.k_eff:>4} {r.status:<9}"
        )


def _execute_runs(
    runs: list[RunRequest], resolution: int, jobs: int = 1
) -> tuple[list[ResultRow], bool]:
    mu_cache: dict[tuple[RelaxScheme, RelaxParams], float] = {}

    def predicted_mu(scheme: RelaxScheme, params: RelaxParams) -> float:
        key = (scheme, params)
        if key not in mu_cache:
            mu_cache[key] = smoothing_factor(scheme, params, resolution=resolution).mu
        return mu_cache[key]

    # prefill sequentially: the cache itself is not thread safe
    for run in runs:
        predicted_mu(run.scheme, run.params)

    def one(run: RunRequest) -> ResultRow:
        spec = CycleSpec(
            scheme=run.scheme, params=run.params, nu1=run.nu1, nu2=run.nu2, kind=run.kind
        )
        mu_nu = predicted_mu(run.scheme, run.params) ** (run.nu1 + run.nu2)
        t0 = time.perf_counter()
        try:
            measured = measure_rho(spec, GridSpec(run.n), k_max=run.k_max, seed=run.seed)
            return ResultRow(
                run.experiment, run.scheme.value, run.kind.value, run.n,
                run.nu1, run.nu2, measured.rho, measured.k_eff, mu_nu,
                run.seed, time.perf_counter() - t0,
            )
        except DivergenceError:
            return ResultRow(
                run.experiment, run.scheme.value, run.kind.value, run.n,
                run.nu1, run.nu2, float("nan"), 0, mu_nu,
                run.seed, time.perf_counter() - t0, status="diverged",
            )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, runs))
    else:
        rows = [one(run) for run in runs]

    rows.sort(key=lambda r: (r.experiment, r.scheme, r.kind, r.n, r.nu1 + r.nu2))
    return rows, any(r.status != "ok" for r in rows)


def _load_experiments(args) -> tuple[list[ExperimentConfig], dict]:
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    else:
        text = default_tables_config()
    experiments, opts = parse_config(text, seed_override=args.seed, kmax_override=args.kmax)
    if args.scheme:
        wanted = {RelaxScheme.from_tag(t) for t in args.scheme}
        experiments = [e for e in experiments if e.scheme in wanted]
        if not experiments:
            raise UsageError(f"no configured experiment matches --scheme {args.scheme}")
    if args.resolution is not None:
        opts["resolution"] = args.resolution
    if args.out is not None:
        opts["out"] = args.out
    return experiments, opts


def _cmd_tables(args) -> int:
    experiments, opts = _load_experiments(args)
    runs = expand_runs(experiments)
    rows, any_diverged = _execute_runs(runs, opts["resolution"], jobs=args.jobs)
    _print_table(rows)
    out = opts["out"] or "tables.csv"
    _write_csv(out, rows)
    print(f"\nwrote {len(rows)} rows to {out}")
    return 2 if any_diverged else 0


def _cmd_lfa_scan(args) -> int:
    schemes = (
        [RelaxScheme.from_tag(t) for t in args.scheme]
        if args.scheme
        else list(DEFAULT_SEARCH_BOXES)
    )
    resolution = args.resolution if args.resolution is not None else 64
    records = []
    header = f"{'scheme':<8} {'omega*':>8} {'alpha*':>8} {'sigma*':>8} {'omega_j*':>9} {'mu*':>9} {'analytic':>9} {'|dev|':>9}"
    print(header)
    print("-" * len(header))
    for scheme in schemes:
        params, mu = optimize_params(scheme, resolution=resolution)
        expected = _ANALYTIC_MU[scheme]
        dev = abs(mu - expected)
        print(
            f"{scheme.value:<8} {params.omega:>8.4f} {params.alpha:>8.4f} "
            f"{params.sigma:>8.4f} {params.omega_j:>9.4f} {mu:>9.6f} {expected:>9.6f} {dev:>9.2e}"
        )
        records.append(
            {
                "scheme": scheme.value,
                "omega": f"{params.omega:.6f}",
                "alpha": f"{params.alpha:.6f}",
                "sigma": f"{params.sigma:.6f}",
                "omega_j": f"{params.omega_j:.6f}",
                "mu": f"{mu:.8f}",
                "analytic_mu": f"{expected:.8f}",
                "abs_deviation": f"{dev:.2e}",
            }
        )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(records[0]))
            writer.writeheader()
            writer.writerows(records)
        print(f"\nwrote {len(records)} rows to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    indices = None
    if args.criteria:
        try:
            indices = [int(s) for s in args.criteria.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--criteria expects comma-separated integers, got {args.criteria!r}")
        bad = [i for i in indices if not 1 <= i <= len(acceptance.CRITERIA)]
        if bad:
            raise UsageError(f"criterion indices out of range 1..{len(acceptance.CRITERIA)}: {bad}")
    results = acceptance.run_all(indices)
    failed = [r for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria passed")
    return 2 if failed else 0


def _cmd_solve(args) -> int:
    try:
        scheme = RelaxScheme.from_tag(args.scheme)
        kind = CycleKind.from_tag(args.kind)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    params = PRESETS[scheme]
    overrides = {
        k: v
        for k, v in (
            ("omega", args.omega),
            ("alpha", args.alpha),
            ("sigma", args.sigma),
            ("omega_j", args.omega_j),
        )
        if v is not None
    }
    if overrides and args.preset:
        raise UsageError("--preset conflicts with explicit parameter overrides")
    if overrides:
        from dataclasses import replace

        params = replace(params, **overrides)
    if args.n < 8 or (args.n & (args.n - 1)) != 0:
        raise UsageError(f"--n must be a power of two >= 8, got {args.n}")

    spec = CycleSpec(scheme=scheme, params=params, nu1=args.nu1, nu2=args.nu2, kind=kind)
    resolution = args.resolution if args.resolution is not None else DEFAULT_RESOLUTION
    mu = smoothing_factor(scheme, params, resolution=resolution).mu
    nu = args.nu1 + args.nu2
    try:
        result = measure_rho(
            spec, GridSpec(args.n), k_max=args.kmax or DEFAULT_KMAX,
            seed=args.seed if args.seed is not None else DEFAULT_SEED,
        )
    except DivergenceError as exc:
        print(f"diverged: {exc}")
        return 2
    print(
        f"scheme={scheme.value} kind={kind.value} h=1/{args.n} nu={args.nu1}+{args.nu2}\n"
        f"rho_m = {result.rho:.6f}  (k_eff = {result.k_eff}, rel defect {result.rel_defect:.3e})\n"
        f"LFA smoothing mu = {mu:.6f}, mu^nu = {mu**nu:.6f}, |rho - mu^nu| = {abs(result.rho - mu**nu):.6f}"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="stokes-mg", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="base 64-bit seed")
        p.add_argument("--out", type=str, default=None, help="CSV output path")
        p.add_argument("--resolution", type=int, default=None, help="LFA lattice resolution per axis")
        p.add_argument("--kmax", type=int, default=None, help="measurement cycle count")
        p.add_argument("--scheme", action="append", default=None, help="restrict to scheme tag (repeatable)")

    p_tables = sub.add_parser("tables", help="reproduce the convergence-factor tables")
    common(p_tables)
    p_tables.add_argument("--config", type=str, default=None, help="experiment config file")
    p_tables.add_argument("--jobs", type=int, default=1, help="worker threads for independent runs")
    p_tables.set_defaults(func=_cmd_tables)

    p_scan = sub.add_parser("lfa-scan", help="grid-search optimal smoothing parameters")
    common(p_scan)
    p_scan.set_defaults(func=_cmd_lfa_scan)

    p_verify = sub.add_parser("verify", help="run the acceptance-criteria suite")
    p_verify.add_argument("--criteria", type=str, default=None, help="comma-separated criterion indices")
    p_verify.set_defaults(func=_cmd_verify)

    p_solve = sub.add_parser("solve", help="one-off measurement with reporting")
    common(p_solve)
    p_solve.add_argument("--n", type=int, required=True, help="cells per side (power of two >= 8)")
    p_solve.add_argument("--kind", type=str, default="twogrid", help="twogrid | v | w")
    p_solve.add_argument("--nu1", type=int, default=1)
    p_solve.add_argument("--nu2", type=int, default=0)
    p_solve.add_argument("--preset", action="store_true", help="use the scheme's preset parameters")
    p_solve.add_argument("--omega", type=float, default=None)
    p_solve.add_argument("--alpha", type=float, default=None)
    p_solve.add_argument("--sigma", type=float, default=None)
    p_solve.add_argument("--omega-j", dest="omega_j", type=float, default=None)
    p_solve.set_defaults(func=_cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "solve" and not args.scheme:
        parser.error("solve requires --scheme")
    if getattr(args, "scheme", None) and args.command == "solve":
        if len(args.scheme) != 1:
            parser.error("solve takes exactly one --scheme")
        args.scheme = args.scheme[0]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
