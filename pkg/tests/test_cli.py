import json

import numpy as np
import pytest

from mch_ist import cli
from mch_ist.artifacts import load_config, read_table, write_table

GRID = {"n_k": 512, "k_max": 24.0}


def write_config(path, **kw):
    kw.setdefault("grid", GRID)
    path.write_text(json.dumps(kw))
    return str(path)


def test_roundtrip_command(tmp_path, capsys):
    cfg = write_config(tmp_path / "rt.json", command="roundtrip", out=str(tmp_path / "rt"))
    assert cli.main(["--config", cfg]) == 0
    report = json.loads((tmp_path / "rt" / "roundtrip.json").read_text())
    assert report["passed"] and report["sup_error"] < 1e-4
    assert "roundtrip sup error" in capsys.readouterr().out


def test_evolve_then_inverse_reproduces_fields(tmp_path):
    ev = write_config(tmp_path / "ev.json", command="evolve", times=[0.0, 0.5], n_x_out=101)
    assert cli.main(["--config", ev, "--out", str(tmp_path / "ev")]) == 0
    inv = write_config(tmp_path / "inv.json", command="inverse", times=[0.0, 0.5], n_x_out=101,
                       scattering_csv=str(tmp_path / "ev" / "scattering.csv"))
    assert cli.main(["--config", inv, "--out", str(tmp_path / "inv")]) == 0
    for tag in ("000", "001"):
        _, a = read_table(tmp_path / "ev" / f"field_x_{tag}.csv")
        _, b = read_table(tmp_path / "inv" / f"field_x_{tag}.csv")
        assert np.max(np.abs(a["m"] - b["m"])) < 1e-12
    head, cols = read_table(tmp_path / "ev" / "scattering.csv")
    assert head["unitarity"] < 1e-8 and len(cols["k"]) == 512


def test_outputs_are_reproducible(tmp_path):
    cfg = write_config(tmp_path / "fw.json", command="forward")
    assert cli.main(["--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["--config", cfg, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "scattering.csv").read_bytes() == (tmp_path / "b" / "scattering.csv").read_bytes()


def test_soliton_command(tmp_path):
    z = np.exp(0.5j)
    c = 1j * z
    cfg = write_config(tmp_path / "sol.json", command="soliton", solitons=[[z.real, z.imag, c.real, c.imag]],
                       times=[0.0], grid={"y_half_width": 30.0}, x_window=25.0, n_x_out=201)
    assert cli.main(["--config", cfg, "--out", str(tmp_path / "sol")]) == 0
    _, ycols = read_table(tmp_path / "sol" / "soliton_y_000.csv")
    assert ycols["q"].min() >= 1.0
    peak = np.max(np.abs(ycols["m"]))
    assert peak == pytest.approx(1.557 * np.sqrt(0.5), abs=2e-3)
    _, cols = read_table(tmp_path / "sol" / "soliton_x_000.csv")
    assert 0.9 * peak < np.max(np.abs(cols["m"])) <= peak


def test_positional_command_overrides_config(tmp_path):
    cfg = load_config(write_config(tmp_path / "c.json", command="forward"), {"command": "roundtrip"})
    assert cfg.command == "roundtrip"


def test_hash_ignores_output_directory(tmp_path):
    path = write_config(tmp_path / "c.json", command="forward")
    a = load_config(path, {"out": "x"})
    b = load_config(path, {"out": "y"})
    c = load_config(path, {"out": "y", "kappa": 2.0})
    assert a.hash == b.hash != c.hash


@pytest.mark.parametrize("payload", [
    {"command": "forward", "bogus": 1},
    {"command": "fly"},
    {"command": "forward", "times": [1.0, 0.5]},
    {"command": "forward", "kappa": -1.0},
    {"command": "forward", "profile": [{"kind": "box"}]},
    {"command": "soliton", "solitons": [[1.0, 2.0]]},
    {"command": "inverse"},
])
def test_config_errors_exit_2(tmp_path, payload):
    cfg = write_config(tmp_path / "bad.json", out=str(tmp_path / "o"), **payload)
    assert cli.main(["--config", cfg]) == 2


def test_missing_files_exit_2(tmp_path):
    assert cli.main(["--config", str(tmp_path / "none.json")]) == 2
    cfg = write_config(tmp_path / "inv.json", command="inverse", scattering_csv=str(tmp_path / "none.csv"),
                       out=str(tmp_path / "o"))
    assert cli.main(["--config", cfg]) == 2


def test_numerical_errors_exit_3(tmp_path, capsys):
    cfg = write_config(tmp_path / "slow.json", command="forward", out=str(tmp_path / "o"),
                       profile=[{"kind": "gauss", "amplitude": 0.1, "width": 5.0}])
    assert cli.main(["--config", cfg]) == 3
    assert "direct" in capsys.readouterr().err


def test_strict_mode_turns_warnings_into_exit_4(tmp_path):
    cfg = write_config(tmp_path / "w.json", command="roundtrip", x_window=1.0, n_x_out=41,
                       out=str(tmp_path / "o"))
    assert cli.main(["--config", cfg]) == 0
    assert cli.main(["--config", cfg, "--strict"]) == 4


def test_profile_csv_input(tmp_path):
    x = np.linspace(-12, 12, 2401)
    write_table(tmp_path / "p.csv", {"note": "gauss"}, {"x": x, "m0": 0.1 * np.exp(-x * x)})
    cfg = write_config(tmp_path / "c.json", command="roundtrip", profile_csv=str(tmp_path / "p.csv"),
                       out=str(tmp_path / "o"))
    assert cli.main(["--config", cfg]) == 0


def test_table_roundtrip(tmp_path):
    z = np.array([1 + 2j, -0.5j])
    write_table(tmp_path / "t.csv", {"a": 1}, {"x": np.array([0.1, 1 / 3]), "z": z})
    head, cols = read_table(tmp_path / "t.csv")
    assert head["a"] == 1
    assert np.array_equal(cols["z"], z) and cols["x"][1] == 1 / 3
