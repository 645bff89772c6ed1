import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from levikin.cli import main
from levikin.config import raw_preset
from levikin.dynamics import read_trace


def _scenario(tmp_path, name="small.json", **sections):
    sc = raw_preset("paper-55nm-sld")
    sc["simulation"].update(n_repeats=4, window_s=0.002, n_trajectories=2, duration_s=2e-4)
    for key, value in sections.items():
        sc.setdefault(key, {}).update(value) if isinstance(value, dict) else sc.__setitem__(key, value)
    path = tmp_path / name
    path.write_text(json.dumps(sc))
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_rates_preset(tmp_path, capsys):
    assert main(["rates", "--preset", "paper-55nm-sld", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "rates.csv")
    assert rows[0] == ["axis", "gamma_ph_per_s", "dTdt_K_per_s", "ratio_to_x", "method"]
    assert len(rows) == 7
    summary = json.loads((tmp_path / "rates.json").read_text())
    assert summary["closed_form_dTdt_K_per_s"]["z"] == pytest.approx(0.4948, rel=1e-3)
    assert "axis" in capsys.readouterr().out


def test_rates_oracle(tmp_path):
    assert main(["rates", "--preset", "paper-70nm-sld", "--oracle", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "rates.json").read_text())
    assert summary["oracle"] is True
    assert summary["quadrature_convergence"] < 1e-3


def test_simulate_and_trace(tmp_path):
    cfg = _scenario(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--trace", "--trajectories", "3", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "simulate.csv")
    assert rows[0] == ["time_s", "axis", "T_cm_K", "stderr_K"]
    dt, q = read_trace(tmp_path / "trace.bin")
    assert dt == 1e-7 and q.shape == (3, 2001)
    assert json.loads((tmp_path / "simulate.json").read_text())["n_trajectories"] == 3


def test_reheat_then_fit(tmp_path):
    cfg = _scenario(tmp_path)
    assert main(["reheat", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "reheat.json").read_text())
    assert summary["n_repeats"] == 4
    fit_dir = tmp_path / "fit"
    assert main(["fit", str(tmp_path / "reheat.csv"), "--out", str(fit_dir)]) == 0
    fit = json.loads((fit_dir / "reheat_fit.json").read_text())
    assert set(fit) == {"x", "y", "z"}
    assert np.isfinite(fit["x"]["a1_K_per_s"])


def test_reheat_byte_identical_for_fixed_seed(tmp_path):
    cfg = _scenario(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reheat", "--config", str(cfg), "--seed", "11", "--out", str(a)]) == 0
    assert main(["reheat", "--config", str(cfg), "--seed", "11", "--threads", "2", "--out", str(b)]) == 0
    assert (a / "reheat.csv").read_bytes() == (b / "reheat.csv").read_bytes()
    assert main(["reheat", "--config", str(cfg), "--seed", "12", "--out", str(b)]) == 0
    assert (a / "reheat.csv").read_bytes() != (b / "reheat.csv").read_bytes()


def test_sweep_units_and_refit(tmp_path):
    cfg = _scenario(tmp_path)
    pm, pp = tmp_path / "mbar", tmp_path / "pa"
    assert main(["sweep", "--config", str(cfg), "--pressures", "1e-7,1e-6,1e-5", "--out", str(pm)]) == 0
    assert main(
        ["sweep", "--config", str(cfg), "--pressures", "1e-5,1e-4,1e-3", "--pressure-unit", "Pa", "--out", str(pp)]
    ) == 0
    fm = json.loads((pm / "sweep_fit.json").read_text())
    fp = json.loads((pp / "sweep_fit.json").read_text())
    # same physical pressures, same seeds: identical rates, intercepts and a2 up to the unit factor
    for a in "xyz":
        assert fp["a_ph"][a] == pytest.approx(fm["a_ph"][a], rel=1e-9)
    assert fp["a2"] * 100 == pytest.approx(fm["a2"], rel=1e-9)
    assert _rows(pm / "sweep.csv")[0][0] == "pressure_mbar"
    refit = tmp_path / "refit"
    assert main(["fit", str(pm / "sweep.csv"), "--pressure-unit", "Pa", "--out", str(refit)]) == 0
    assert json.loads((refit / "sweep_fit.json").read_text())["a2"] == pytest.approx(fp["a2"], rel=1e-9)


def test_psd_command(tmp_path):
    cfg = _scenario(
        tmp_path,
        gas={"pressure_mbar": 5.0},
        source={"power_mW": 0.0},
        simulation={"initial_state": "stationary", "duration_s": 0.01},
        psd={"axis": "z"},
    )
    cfg_data = json.loads(cfg.read_text())
    del cfg_data["simulation"]["initial_temp_mK"]
    cfg.write_text(json.dumps(cfg_data))
    assert main(["psd", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    fits = json.loads((tmp_path / "psd_fit.json").read_text())
    assert fits["z"]["radius_nm"] == pytest.approx(55, rel=0.15)


# -- error paths -------------------------------------------------------------


def test_unknown_key_exit_2(tmp_path, capsys):
    cfg = _scenario(tmp_path, particle={"radius_nm": 55.0, "colour": "blue"})
    assert main(["rates", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "particle" in capsys.readouterr().err


def test_zero_duration_exit_2(tmp_path, capsys):
    cfg = _scenario(tmp_path, simulation={"duration_s": 0.0})
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "simulation" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["rates", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    assert main(["fit", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["rates"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["reheat", "--preset", "paper-55nm-sld", "--seed", "-1"])
    assert exc.value.code == 2


def test_single_pressure_sweep_exit_3(tmp_path, capsys):
    cfg = _scenario(tmp_path)
    assert main(["sweep", "--config", str(cfg), "--pressures", "1e-6", "--out", str(tmp_path)]) == 3
    assert "FitError" in capsys.readouterr().err


def test_console_script(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "levikin.cli", "rates", "--preset", "paper-70nm-laser", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "rates.csv").exists()
