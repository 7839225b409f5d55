import csv
import io

import pytest

from stokesmg.cli import main
from stokesmg.config import (
    ExperimentConfig,
    UsageError,
    expand_runs,
    parse_config,
    splitmix64,
)
from stokesmg.relaxation import PRESETS, RelaxParams, RelaxScheme

TINY_CONFIG = """
[global]
seed = 99
kmax = 40
resolution = 64

[smoke]
scheme = qdr
twogrid = 8, 16
nu = 1, 2
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_config_roundtrip():
    experiments, opts = parse_config(TINY_CONFIG)
    assert opts["seed"] == 99 and opts["kmax"] == 40 and opts["resolution"] == 64
    (exp,) = experiments
    assert exp.scheme is RelaxScheme.QDR
    assert exp.params == PRESETS[RelaxScheme.QDR]
    runs = expand_runs(experiments)
    assert len(runs) == 4
    assert all(r.k_max == 40 for r in runs)
    # nu split: ceil/floor
    assert {(r.nu1, r.nu2) for r in runs} == {(1, 0), (1, 1)}


def test_parse_config_param_overrides():
    text = "[a]\nscheme = quzawa\npreset = no\nomega = 0.9\ntwogrid = 16\nnu = 1\n"
    (exp,), _ = parse_config(text)
    assert exp.params == RelaxParams(omega=0.9)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[a]\ntwogrid = 8\n", "scheme"),
        ("[a]\nscheme = nosuch\ntwogrid = 8\n", "unknown scheme"),
        ("[a]\nscheme = qdr\n", "no cycle kinds"),
        ("[a]\nscheme = qdr\ntwogrid = \n", "empty grid-size list"),
        ("[a]\nscheme = qdr\ntwogrid = 12\n", "powers of two"),
        ("[a]\nscheme = qdr\ntwogrid = 4\n", "powers of two"),
        ("[a]\nscheme = qdr\ntwogrid = 8\nnu = 0\n", "nu"),
        ("[a]\nscheme = qdr\ntwogrid = 8\nbogus = 1\n", "unknown keys"),
        ("", "no experiment"),
    ],
)
def test_parse_config_usage_errors(text, fragment):
    with pytest.raises(UsageError) as info:
        parse_config(text)
    assert fragment in str(info.value)


def test_splitmix64_reference_values():
    # deterministic expansion: same input, same stream
    assert splitmix64(0) == splitmix64(0)
    assert splitmix64(1) != splitmix64(2)
    assert 0 <= splitmix64(123456789) < 2**64


def test_expanded_seeds_are_order_independent():
    (exp,), _ = parse_config(TINY_CONFIG)
    runs = expand_runs([exp])
    again = expand_runs([exp])
    assert [r.seed for r in runs] == [r.seed for r in again]
    assert len({r.seed for r in runs}) == len(runs)


def test_tables_command_writes_deterministic_csv(tmp_path, capsys):
    cfg = tmp_path / "cfg.ini"
    cfg.write_text(TINY_CONFIG)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["tables", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["tables", "--config", str(cfg), "--out", str(out2)]) == 0
    rows1, rows2 = read_csv(out1), read_csv(out2)
    assert len(rows1) == 4
    for r1, r2 in zip(rows1, rows2):
        r1.pop("wall_time_s"), r2.pop("wall_time_s")
        assert r1 == r2
    assert rows1[0]["status"] == "ok"
    assert 0.0 < float(rows1[0]["rho"]) < 1.0
    console = capsys.readouterr().out
    assert "rho_m" in console and "1/8" in console


def test_tables_missing_config_is_usage_error(capsys):
    assert main(["tables", "--config", "/nonexistent/x.ini"]) == 1


def test_tables_scheme_filter_mismatch(tmp_path):
    cfg = tmp_path / "cfg.ini"
    cfg.write_text(TINY_CONFIG)
    assert main(["tables", "--config", str(cfg), "--scheme", "quzawa"]) == 1


def test_solve_command(capsys):
    code = main(
        ["solve", "--scheme", "qdr", "--n", "16", "--kind", "twogrid",
         "--nu1", "1", "--nu2", "1", "--kmax", "40", "--resolution", "64"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "rho_m" in out and "LFA smoothing" in out


def test_solve_usage_errors():
    assert main(["solve", "--scheme", "qdr", "--n", "12"]) == 1
    assert main(["solve", "--scheme", "nosuch", "--n", "16"]) == 1
    assert (
        main(["solve", "--scheme", "qdr", "--n", "16", "--preset", "--omega", "0.9"]) == 1
    )


def test_solve_divergence_exit_code(capsys):
    code = main(
        ["solve", "--scheme", "qdr", "--n", "16", "--omega", "5.0",
         "--kmax", "30", "--resolution", "64"]
    )
    assert code == 2
    assert "diverged" in capsys.readouterr().out


def test_verify_subset(capsys):
    assert main(["verify", "--criteria", "3,11"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 2
    assert main(["verify", "--criteria", "99"]) == 1


def test_lfa_scan_single_scheme(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code = main(["lfa-scan", "--scheme", "dwj", "--out", str(out), "--resolution", "48"])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 1
    assert abs(float(rows[0]["mu"]) - 0.6) < 5e-3
    assert "dwj" in capsys.readouterr().out


def test_presets_resolve_to_documented_defaults():
    # the ExperimentConfig invariant: preset keyword = the documented defaults
    (exp,), _ = parse_config("[t]\nscheme = qibsr\ntwogrid = 8\nnu = 1\n")
    assert exp.params == PRESETS[RelaxScheme.QIBSR]
    assert PRESETS[RelaxScheme.QIBSR].alpha == 1.4
    assert PRESETS[RelaxScheme.QIBSR].omega == pytest.approx(1.05)
    assert PRESETS[RelaxScheme.QIBSR].omega_j == 1.0
