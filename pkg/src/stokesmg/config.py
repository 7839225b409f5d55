"""Experiment configuration: INI-style files, presets, and seed expansion.

A config file holds one ``[global]`` section plus one section per experiment:

    [global]
    seed = 20260811
    kmax = 100
    resolution = 256

    [qdr]
    scheme = qdr
    preset = yes
    twogrid = 32, 64
    v = 128, 256
    nu = 1, 2, 3, 4

Per-experiment keys: ``scheme`` (required tag), ``preset`` (default yes),
optional ``omega``/``alpha``/``sigma``/``omega_j`` overrides, one
comma-separated grid-size list per cycle kind (``twogrid``, ``v``, ``w``),
``nu`` (list of total smoothing counts, split nu1 = ceil(nu/2)), and
optional ``seed``/``kmax`` overrides.  CLI flags override file values.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

from .multigrid import CycleKind
from .relaxation import PRESETS, RelaxParams, RelaxScheme

__all__ = [
    "UsageError",
    "ExperimentConfig",
    "RunRequest",
    "parse_config",
    "default_tables_config",
    "expand_runs",
    "splitmix64",
]

DEFAULT_SEED = 1234
DEFAULT_KMAX = 100
DEFAULT_RESOLUTION = 256

DEFAULT_TABLES_INI = """
[qdr]
scheme = qdr
twogrid = 32, 64
v = 128, 256
nu = 1, 2, 3, 4

[qibsr]
scheme = qibsr
twogrid = 32, 64
v = 128, 256
w = 128, 256
nu = 1, 2, 3, 4

[quzawa]
scheme = quzawa
twogrid = 32, 64
v = 128, 256
w = 128, 256
nu = 1, 2, 3, 4
"""


class UsageError(ValueError):
    """Invalid configuration or command line; maps to exit code 1."""


def splitmix64(state: int) -> int:
    """One step of the splitmix64 generator (state in, output out)."""
    mask = (1 << 64) - 1
    z = (state + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a scheme plus the (kind, size, nu) grid to sweep."""

    name: str
    scheme: RelaxScheme
    params: RelaxParams
    sizes: dict  # CycleKind -> list[int]
    nus: tuple[int, ...]
    seed: int
    k_max: int

    def validate(self) -> None:
        if not any(self.sizes.values()):
            raise UsageError(f"[{self.name}] has an empty grid-size list")
        for kind, sizes in self.sizes.items():
            for n in sizes:
                if n < 8 or (n & (n - 1)) != 0:
                    raise UsageError(
                        f"[{self.name}] {kind.value} size {n}: grid sizes must be "
                        "powers of two >= 8"
                    )
        for nu in self.nus:
            if nu < 1:
                raise UsageError(f"[{self.name}] nu entries must be >= 1, got {nu}")
        if self.k_max < 1:
            raise UsageError(f"[{self.name}] kmax must be >= 1, got {self.k_max}")


@dataclass(frozen=True)
class RunRequest:
    """One (scheme, kind, n, nu) measurement with its expanded seed."""

    experiment: str
    scheme: RelaxScheme
    params: RelaxParams
    kind: CycleKind
    n: int
    nu1: int
    nu2: int
    seed: int
    k_max: int


def _parse_int_list(raw: str, where: str) -> list[int]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    try:
        return [int(s) for s in items]
    except ValueError as exc:
        raise UsageError(f"{where}: expected a comma-separated integer list, got {raw!r}") from exc


def _parse_bool(raw: str, where: str) -> bool:
    val = raw.strip().lower()
    if val in ("1", "yes", "true", "on"):
        return True
    if val in ("0", "no", "false", "off"):
        return False
    raise UsageError(f"{where}: expected a boolean, got {raw!r}")


_PARAM_KEYS = ("omega", "alpha", "sigma", "omega_j")
_KIND_KEYS = {"twogrid": CycleKind.TWO_GRID, "v": CycleKind.V, "w": CycleKind.W}


def parse_config(
    text: str,
    seed_override: int | None = None,
    kmax_override: int | None = None,
) -> tuple[list[ExperimentConfig], dict]:
    """Parse config text into experiments plus the global option dict."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"config parse error: {exc}") from exc

    global_opts = {
        "seed": DEFAULT_SEED,
        "kmax": DEFAULT_KMAX,
        "resolution": DEFAULT_RESOLUTION,
        "out": None,
    }
    if parser.has_section("global"):
        section = parser["global"]
        for key in section:
            if key == "seed":
                global_opts["seed"] = int(section[key])
            elif key == "kmax":
                global_opts["kmax"] = int(section[key])
            elif key == "resolution":
                global_opts["resolution"] = int(section[key])
            elif key == "out":
                global_opts["out"] = section[key].strip()
            else:
                raise UsageError(f"[global] has unknown key {key!r}")
    if seed_override is not None:
        global_opts["seed"] = seed_override
    if kmax_override is not None:
        global_opts["kmax"] = kmax_override

    experiments = []
    for name in parser.sections():
        if name == "global":
            continue
        section = parser[name]
        if "scheme" not in section:
            raise UsageError(f"[{name}] is missing the required 'scheme' key")
        try:
            scheme = RelaxScheme.from_tag(section["scheme"])
        except ValueError as exc:
            raise UsageError(f"[{name}] scheme: {exc}") from exc

        use_preset = True
        if "preset" in section:
            use_preset = _parse_bool(section["preset"], f"[{name}] preset")
        params = PRESETS[scheme] if use_preset else RelaxParams()
        overrides = {}
        for key in _PARAM_KEYS:
            if key in section:
                try:
                    overrides[key] = float(section[key])
                except ValueError as exc:
                    raise UsageError(f"[{name}] {key}: expected a number") from exc
        if overrides:
            params = replace(params, **overrides)

        sizes = {}
        for key, kind in _KIND_KEYS.items():
            if key in section:
                sizes[kind] = _parse_int_list(section[key], f"[{name}] {key}")
        if not sizes:
            raise UsageError(f"[{name}] lists no cycle kinds (twogrid/v/w)")

        nus = tuple(_parse_int_list(section.get("nu", "1, 2"), f"[{name}] nu"))
        seed = int(section["seed"]) if "seed" in section else global_opts["seed"]
        k_max = int(section["kmax"]) if "kmax" in section else global_opts["kmax"]

        unknown = (
            set(section)
            - set(_PARAM_KEYS)
            - set(_KIND_KEYS)
            - {"scheme", "preset", "nu", "seed", "kmax"}
        )
        if unknown:
            raise UsageError(f"[{name}] has unknown keys: {sorted(unknown)}")

        config = ExperimentConfig(
            name=name,
            scheme=scheme,
            params=params,
            sizes=sizes,
            nus=nus,
            seed=seed,
            k_max=k_max,
        )
        config.validate()
        experiments.append(config)

    if not experiments:
        raise UsageError("config defines no experiment sections")
    return experiments, global_opts


def default_tables_config() -> str:
    return DEFAULT_TABLES_INI


def expand_runs(experiments: list[ExperimentConfig]) -> list[RunRequest]:
    """Flatten experiments into a deterministic, seeded run list.

    Runs are ordered by (experiment, kind, n, nu); run i uses the seed
    splitmix64(experiment_seed + i), so the per-run seeds do not depend on
    execution order or worker scheduling.
    """
    runs = []
    for exp in experiments:
        combos = []
        for kind in (CycleKind.TWO_GRID, CycleKind.V, CycleKind.W):
            for n in exp.sizes.get(kind, []):
                for nu in exp.nus:
                    combos.append((kind, n, nu))
        for i, (kind, n, nu) in enumerate(combos):
            nu1 = (nu + 1) // 2
            runs.append(
                RunRequest(
                    experiment=exp.name,
                    scheme=exp.scheme,
                    params=exp.params,
                    kind=kind,
                    n=n,
                    nu1=nu1,
                    nu2=nu - nu1,
                    seed=splitmix64(exp.seed + i) % (2**32),
                    k_max=exp.k_max,
                )
            )
    return runs
