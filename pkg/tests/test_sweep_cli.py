from __future__ import annotations

import math
import subprocess
import sys

import numpy as np
import pytest

from critchain import cli
from critchain.config import Axis, SweepConfig, apply_config_text, parse_phi_list, read_config_text
from critchain.electron import Form, fs_expectations
from critchain.errors import ConfigError, RangeError
from critchain.model import Regime
from critchain.sweep import JOBS_ENV, default_jobs, format_value, render_csv, run_sweep


def test_axis_parsing():
    a = Axis.parse("g:0.1:0.5:5")
    assert a.values == pytest.approx((0.1, 0.2, 0.3, 0.4, 0.5))
    b = Axis.parse("sites:100:1e6:5:log")
    assert all(isinstance(v, int) and v % 2 == 0 for v in b.values)
    assert b.values[0] == 100 and b.values[-1] == 1000000
    c = Axis.parse("kappa_ph=0.1,0.3")
    assert c.values == (0.1, 0.3)
    for bad in ("g:1:2", "bogus:1:2:3", "g:1:2:x", "g=", "eta:0:1:3:log"):
        with pytest.raises(ConfigError):
            Axis.parse(bad)


def test_phi_list():
    assert parse_phi_list("0, 0.25pi, pi, 1.5") == pytest.approx((0.0, math.pi / 4, math.pi, 1.5))
    with pytest.raises(ConfigError):
        parse_phi_list("a")


def test_config_round_trip(tmp_path):
    cfg = SweepConfig(
        quantity="fisher",
        regime=Regime.CAVITY_LOSS,
        axes=(Axis.range("g", 0.1, 0.5, 3),),
        phi=(0.0, 0.5),
    )
    text = "\n".join(cfg.header_lines())
    back = apply_config_text(SweepConfig(), text)
    assert back.header_lines() == cfg.header_lines()
    f = tmp_path / "c.ini"
    f.write_text("[params]\ng = 0.3\n[sweep]\nregime = chain\naxes = eta:1:3:3\n")
    got = apply_config_text(SweepConfig(), read_config_text(str(f)))
    assert got.regime is Regime.CHAIN_LOSS and got.params["g"] == 0.3
    f.write_text("[nonsense]\na = 1\n")
    with pytest.raises(ConfigError):
        apply_config_text(SweepConfig(), read_config_text(str(f)))


def test_default_jobs(monkeypatch):
    monkeypatch.delenv(JOBS_ENV, raising=False)
    assert default_jobs() == 1
    monkeypatch.setenv(JOBS_ENV, "3")
    assert default_jobs() == 3
    monkeypatch.setenv(JOBS_ENV, "zero")
    with pytest.raises(RangeError):
        default_jobs()


def test_format_value():
    assert format_value(0.1) == "1.0000000000000001e-01"
    assert float(format_value(math.pi)) == math.pi
    assert format_value(math.nan) == "nan" and format_value(-math.inf) == "-inf"
    assert format_value(400) == "400"


def test_sweep_flags_unstable_rows():
    cfg = SweepConfig(quantity="qfi", regime=Regime.CAVITY_LOSS, axes=(Axis.explicit("g", (0.5, 0.95)),), params={
        "omega0": 1.0, "thop": 1.0, "g": 0.5, "kappa_ph": 0.05, "eta": 2.41, "sites": 400})
    res = run_sweep(cfg)
    assert res.flags() == ["", "UNSTABLE"]
    assert math.isnan(res.column("qfi")[1])


def test_sweep_parallel_identical():
    cfg = SweepConfig(quantity="fisher", regime=Regime.LOSSLESS, axes=(Axis.range("g", 0.1, 0.8, 7),), phi=(0.0, 1.0))
    a = render_csv(run_sweep(cfg))
    b = render_csv(run_sweep(cfg.with_(jobs=3)))
    assert a == b


def test_chain_qfi_monotone_in_sites():
    cfg = SweepConfig(quantity="qfi", regime=Regime.CHAIN_LOSS, axes=(Axis.range("sites", 1e2, 1e6, 41, "log"),))
    q = run_sweep(cfg).column("qfi")
    assert np.all(np.diff(q) > 0)


def test_spectrum_and_current_quantities():
    cfg = SweepConfig(quantity="spectrum", regime=Regime.LOSSLESS, params=dict(SweepConfig().params, g=0.0),
                      axes=(Axis.explicit("s", (-0.5, 0.0, 0.5)),))
    res = run_sweep(cfg)
    s = res.column("s")
    # Decoupled cavity: discrete Fermi-sea energy plus omega0/2, within O(1/L) of -2 t_h L cos(s)/pi.
    t_bar = [fs_expectations(SweepConfig().system_params(), v, Form.DISCRETE).t_bar for v in s]
    assert np.allclose(res.column("E0_full"), np.array(t_bar) + 0.5, rtol=1e-12)
    assert np.allclose(res.column("E0_full"), -800 / math.pi * np.cos(s) + 0.5, rtol=5 / 400)
    cur = run_sweep(SweepConfig(quantity="current", regime=Regime.CHAIN_LOSS, axes=(Axis.explicit("eta", (2.41,)),)))
    assert cur.column("j_bar")[0] == pytest.approx(-137.25824937888848, rel=1e-12)


def run_cli(*args, env=None, cwd=None):
    return subprocess.run([sys.executable, "-m", "critchain.cli", *args], capture_output=True, text=True, env=env, cwd=cwd)


def test_cli_usage_errors(tmp_path):
    assert run_cli().returncode == 1
    assert run_cli("nope").returncode == 1
    assert run_cli("fig3", "--eta", "-1", "--out", str(tmp_path)).returncode == 1
    assert run_cli("sweep", "--axis", "bogus:1:2:3", "--out", str(tmp_path)).returncode == 1
    assert run_cli("fig3", "--config", str(tmp_path / "missing.ini")).returncode == 1
    assert run_cli("fig3", "--jobs", "0").returncode == 1


def test_cli_fig3_and_reproduction(tmp_path):
    out = tmp_path / "a"
    assert cli.main(["fig3", "--out", str(out), "--phi", "0,0.5pi"]) == 0
    assert (out / "fig3.csv").exists() and (out / "fig3.svg").exists()
    again = tmp_path / "b"
    assert cli.main(["sweep", "--config", str(out / "fig3.csv"), "--out", str(again), "--no-svg", "--name", "fig3"]) == 0
    assert (again / "fig3.csv").read_bytes() == (out / "fig3.csv").read_bytes()
    assert not (again / "fig3.svg").exists()


def test_cli_flag_overrides_config(tmp_path):
    f = tmp_path / "c.ini"
    f.write_text("[params]\nkappa_ph = 0.3\n")
    out = tmp_path / "o"
    assert cli.main(["fig6", "--config", str(f), "--out", str(out), "--no-svg", "--kappa-ph", "0.2"]) == 0
    text = (out / "fig6.csv").read_text()
    assert "# kappa_ph = 0.2" in text


def test_cli_check_exit_zero(tmp_path):
    assert cli.main(["check", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "check.csv").read_text()
    assert "lossless_cfi_printed_phi0" in text
