import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from plastibite import io
from plastibite.cli import main
from plastibite.config import ConfigError, parse_config, parse_config_text
from plastibite.errors import ValidationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """\
[params]
delta = 8.0
eta = 3.0
a_dagger = 10.0
t_end = 20.0

[grid]
n_x = 32
n_a = 100

[mortality]
family = blowup
mu0 = 0.1
kappa = 1.0

[fertility]
beta0 = {beta0}
{extra}
"""


def write(tmp_path, beta0=0.6, extra="", name="run.ini"):
    path = tmp_path / name
    path.write_text(BASE.format(beta0=beta0, extra=extra))
    return path


def test_parse_minimal_defaults(tmp_path):
    path = tmp_path / "min.ini"
    path.write_text("[params]\ndelta = 1\neta = 3\na_dagger = 10\n[fertility]\nbeta0 = 0.5\n")
    cfg = parse_config(path)
    assert cfg.sim.n_x == 64 and cfg.sim.n_a == 200 and cfg.sim.record_every == 50
    assert cfg.params.t_end == 50.0 and cfg.tolerances.zero_tol == 1e-6
    assert cfg.initial == {"kind": "constant", "value": 1.0}


def test_parse_errors_carry_line_numbers(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, extra="colour = blue"))
    assert err.value.line == 18 and "colour" in str(err.value)
    with pytest.raises(ConfigError) as err:
        parse_config_text(BASE.format(beta0=0.6, extra="[bogus]\nx = 1"))
    assert err.value.line == 18
    with pytest.raises(ConfigError) as err:
        parse_config_text(BASE.format(beta0="abc", extra=""))
    assert err.value.line == 17


def test_parse_validation_names_assumption(tmp_path):
    with pytest.raises(ValidationError) as err:
        parse_config(write(tmp_path, beta0=0.0))
    assert err.value.assumption == "J2" and "(J2)" in str(err.value)
    text = BASE.format(beta0=0.6, extra="").replace("delta = 8.0", "delta = -1")
    with pytest.raises(ValidationError) as err:
        parse_config_text(text)
    assert "range" in str(err.value)
    text = BASE.format(beta0=0.6, extra="").replace("family = blowup", "family = constant")
    with pytest.raises(ValidationError) as err:
        parse_config_text(text)
    assert err.value.assumption == "J1"


def test_tables_resolve_relative_paths(tmp_path):
    (tmp_path / "beta.csv").write_text("# age,rate\n0,0.0\n2,0.8\n10,0.8\n")
    path = write(tmp_path, extra="family = table\ntable = beta.csv").read_text()
    path = path.replace("beta0 = 0.6\n", "")
    (tmp_path / "t.ini").write_text(path)
    cfg = parse_config(tmp_path / "t.ini")
    assert cfg.rates.beta(1.0) == pytest.approx(0.4)
    (tmp_path / "t2.ini").write_text(path.replace("beta.csv", "missing.csv"))
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "t2.ini")


def run_cli(*args):
    return main([str(a) for a in args])


def test_spectral_and_monotone_in_beta(tmp_path, capsys):
    assert run_cli("spectral", "--config", write(tmp_path, 0.6), "--out", tmp_path / "a") == 0
    assert run_cli("spectral", "--config", write(tmp_path, 1.2, name="b.ini"), "--out", tmp_path / "b") == 0
    a = json.loads((tmp_path / "a" / "spectral.json").read_text())
    b = json.loads((tmp_path / "b" / "spectral.json").read_text())
    assert b["lambda0"] > a["lambda0"] > 0
    assert a["regime"] == "supercritical" and len(a["phi"]) == 32


def test_spectral_critical_fixture(tmp_path):
    assert run_cli("spectral", "--config", write(tmp_path, 0.25), "--out", tmp_path, "--criticalize") == 0
    rec = json.loads((tmp_path / "spectral.json").read_text())
    assert abs(rec["lambda0"]) <= 1e-8 and rec["regime"] == "critical"


def test_exit_codes(tmp_path, capsys):
    assert run_cli("spectral", "--config", write(tmp_path, 0.0), "--out", tmp_path) == 1
    assert "J2" in capsys.readouterr().err
    assert run_cli("spectral", "--config", tmp_path / "nope.ini", "--out", tmp_path) == 1
    tiny = write(tmp_path, 1e-300, name="tiny.ini")
    assert run_cli("spectral", "--config", tiny, "--out", tmp_path) == 2
    assert run_cli("spectral", "--config", write(tmp_path), "--out", tmp_path, "--tol-zero", "-1") == 1


def test_simulate_outputs(tmp_path):
    extra = "[initial]\nkind = zero\n[simulation]\nrecord_every = 1000"
    assert run_cli("simulate", "--config", write(tmp_path, extra=extra), "--out", tmp_path) == 0
    t, l2, total = io.read_trajectory_csv(tmp_path / "trajectory.csv")
    assert t.size == 201 and not np.any(l2) and not np.any(total)
    assert sorted(os.listdir(tmp_path / "snapshots")) == ["snapshot_000000.csv", "snapshot_000200.csv"]
    x, ages, values = io.read_snapshot_csv(tmp_path / "snapshots" / "snapshot_000200.csv")
    assert x.size == 32 and ages.size == 100 and not np.any(values)


def test_simulate_grid_override_and_growth(tmp_path):
    assert run_cli("spectral", "--config", write(tmp_path), "--out", tmp_path) == 0
    assert run_cli("simulate", "--config", write(tmp_path), "--out", tmp_path, "--grid", 32, 100) == 0
    lam0 = json.loads((tmp_path / "spectral.json").read_text())["lambda0"]
    t, l2, _ = io.read_trajectory_csv(tmp_path / "trajectory.csv")
    m = t >= 10
    assert abs(np.polyfit(t[m], np.log(l2[m]), 1)[0] - lam0) < 1e-2


def test_steady_workflows(tmp_path, capsys):
    assert run_cli("steady", "--config", write(tmp_path, 0.6), "--out", tmp_path / "sup") == 0
    assert "no nonnegative steady state" in capsys.readouterr().out
    assert run_cli("steady", "--config", write(tmp_path, 0.25), "--out", tmp_path / "sub") == 0
    assert "trivial" in capsys.readouterr().out
    assert run_cli("steady", "--config", write(tmp_path, 0.25), "--out", tmp_path / "crit",
                   "--criticalize") == 0
    cert = json.loads((tmp_path / "crit" / "certificate.json").read_text())
    assert cert["rho0"] > 0 and cert["residual"] <= 1e-3 and cert["a1"] == 9.0
    assert run_cli("render", tmp_path / "crit" / "steady.csv", "--out", tmp_path / "s.svg",
                   "--a-max", cert["a1"]) == 0
    desc = ET.parse(tmp_path / "s.svg").getroot()
    text = (tmp_path / "s.svg").read_text()
    vmin = float(text.split("vmin=")[1].split()[0])  # "vmin=<repr> vmax=<repr>"
    assert vmin == pytest.approx(cert["rho0"], rel=1e-12)
    assert desc.tag.endswith("svg")


def test_render_zero_field(tmp_path):
    x = np.arange(8) * 3.0
    ages = (np.arange(4) + 0.5) * 2.5
    io.write_snapshot_csv(tmp_path / "z.csv", x, ages, np.zeros((4, 8)))
    assert run_cli("render", tmp_path / "z.csv", "--out", tmp_path) == 0
    svg = (tmp_path / "z.svg").read_text()
    ET.fromstring(svg)
    assert "biting time" in svg and "age" in svg


def test_sweep_regimes_and_single_point(tmp_path, monkeypatch):
    monkeypatch.setenv("PLASTIBITE_THREADS", "3")
    extra = "[sweep]\naxis1 = beta_scale 0.5 3.0 6\ntask = regime"
    assert run_cli("sweep", "--config", write(tmp_path, 0.25, extra=extra), "--out", tmp_path / "s") == 0
    lines = (tmp_path / "s" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "index,beta_scale,lambda0,regime"
    order = {"subcritical": 0, "critical": 1, "supercritical": 2}
    regimes = [order[line.split(",")[-1]] for line in lines[1:]]
    assert regimes == sorted(regimes) and regimes[0] == 0 and regimes[-1] == 2

    one = "[sweep]\naxis1 = eta 3.0 3.0 1"
    assert run_cli("sweep", "--config", write(tmp_path, 0.25, extra=one), "--out", tmp_path / "o") == 0
    assert run_cli("spectral", "--config", write(tmp_path, 0.25), "--out", tmp_path / "o") == 0
    assert ((tmp_path / "o" / "points" / "point_00000.json").read_bytes()
            == (tmp_path / "o" / "spectral.json").read_bytes())


def test_sweep_eta_axis_all_finite(tmp_path):
    extra = "[sweep]\naxis1 = eta 0.5 12.0 4\naxis2 = beta_scale 1.0 2.0 2"
    assert run_cli("sweep", "--config", write(tmp_path, 0.6, extra=extra), "--out", tmp_path) == 0
    rows = [line.split(",") for line in (tmp_path / "sweep.csv").read_text().splitlines()[1:]]
    assert len(rows) == 8 and all(np.isfinite(float(r[3])) for r in rows)


def test_sweep_guards(tmp_path, monkeypatch):
    big = "[sweep]\naxis1 = eta 1 2 200\naxis2 = delta 1 2 200"
    assert run_cli("sweep", "--config", write(tmp_path, extra=big), "--out", tmp_path) == 1
    monkeypatch.setenv("PLASTIBITE_THREADS", "zero")
    ok = "[sweep]\naxis1 = eta 1 2 2"
    assert run_cli("sweep", "--config", write(tmp_path, extra=ok), "--out", tmp_path) == 1
    assert run_cli("sweep", "--config", write(tmp_path), "--out", tmp_path) == 1


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "plastibite.cli", "spectral", "--config",
                           str(CONFIGS / "supercritical.ini"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "lambda0" in proc.stdout
