"""Command-line front end: configs, run directories, manifests, rerun identity."""

import json
import subprocess

import numpy as np
import pytest

from selforg import cli


def write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


MODEL = {"delta_c": -1.0, "omega_r": 0.05, "n_particles": 8,
         "pump": {"ratio": 2.0}, "seed": 3}


def read_manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_steady_default_sweep(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["steady", "--out", str(out)]) == 0
    rows = (out / "steady.csv").read_text().strip().split("\n")
    assert rows[0] == "r,theta_bar,bunching,B_quadrature"
    assert len(rows) - 1 == 61  # r = 0.00 .. 3.00 step 0.05
    man = read_manifest(out)
    names = {f["name"] for f in man["files"]}
    assert {"steady.csv", "config.json"} <= names
    # manifest checksums match the bytes on disk
    import hashlib
    for f in man["files"]:
        digest = hashlib.sha256((out / f["name"]).read_bytes()).hexdigest()
        assert digest == f["sha256"]


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, {"model": MODEL,
                               "nbody": {"t_end": 2.0, "dt": 0.02,
                                         "sample_dt": 0.5, "n_traj": 3}})
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["nbody", "--config", cfg, "--out", str(a)]) == 0
    assert cli.main(["nbody", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "ensemble.csv").read_bytes() == (b / "ensemble.csv").read_bytes()
    # every artifact except the resolved config (which records output_dir)
    sha_a = {f["name"]: f["sha256"] for f in read_manifest(a)["files"]
             if f["name"] != "config.json"}
    sha_b = {f["name"]: f["sha256"] for f in read_manifest(b)["files"]
             if f["name"] != "config.json"}
    assert sha_a == sha_b
    # a different seed changes the ensemble output
    c = tmp_path / "c"
    assert cli.main(["nbody", "--config", cfg, "--out", str(c), "--seed", "99"]) == 0
    assert (a / "ensemble.csv").read_bytes() != (c / "ensemble.csv").read_bytes()
    assert json.loads((c / "config.json").read_text())["model"]["seed"] == 99


def test_missing_required_key_exits_2(tmp_path, capsys):
    model = {k: v for k, v in MODEL.items() if k != "omega_r"}
    cfg = write_cfg(tmp_path, {"model": model, "vlasov": {"t_end": 1.0}})
    rc = cli.main(["vlasov", "--config", cfg, "--out", str(tmp_path / "r")])
    assert rc == 2
    assert "model.omega_r" in capsys.readouterr().err


def test_missing_model_block_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"meanfield": {"t_end": 1.0}})
    rc = cli.main(["meanfield", "--config", cfg, "--out", str(tmp_path / "r")])
    assert rc == 2
    assert "model" in capsys.readouterr().err


def test_unknown_keys_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"model": MODEL, "typo_block": {}})
    assert cli.main(["steady", "--config", cfg, "--out", str(tmp_path / "r")]) == 2
    assert "unknown" in capsys.readouterr().err
    cfg = write_cfg(tmp_path, {"steady": {"r_mx": 2.0}}, name="cfg2.json")
    assert cli.main(["steady", "--config", cfg, "--out", str(tmp_path / "r2")]) == 2
    assert "r_mx" in capsys.readouterr().err


def test_scenario_mismatch_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"scenario": "steady"})
    assert cli.main(["oracle", "--config", cfg, "--out", str(tmp_path / "r")]) == 2
    assert "steady" in capsys.readouterr().err


def test_config_parse_error_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert cli.main(["steady", "--config", str(p), "--out", str(tmp_path / "r")]) == 2
    assert "parse error" in capsys.readouterr().err


def test_missing_output_dir_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {})
    assert cli.main(["steady", "--config", cfg]) == 2
    assert "output" in capsys.readouterr().err


def test_output_dir_from_config(tmp_path):
    out = tmp_path / "from_cfg"
    cfg = write_cfg(tmp_path, {"output_dir": str(out)})
    assert cli.main(["steady", "--config", cfg]) == 0
    assert (out / "steady.csv").exists()


def test_oracle_scenario_table(tmp_path):
    cfg = write_cfg(tmp_path, {"oracle": {"alphas": [0.5, 2.0],
                                          "n_particles": 200}})
    out = tmp_path / "run"
    assert cli.main(["oracle", "--config", cfg, "--out", str(out)]) == 0
    back = np.genfromtxt(out / "oracle.csv", delimiter=",", names=True)
    assert back.shape == (2,)
    assert back["alpha"].tolist() == [0.5, 2.0]
    # below and above threshold bracket the coherent value
    assert back["g2_quadrature"][0] > 1.5
    assert abs(back["g2_quadrature"][1] - 1.0) < 0.1


def test_nbody_snapshots_registered(tmp_path):
    cfg = write_cfg(tmp_path, {"model": MODEL,
                               "nbody": {"t_end": 2.0, "dt": 0.02, "sample_dt": 0.5,
                                         "n_traj": 2, "snapshot_times": [1.0]}})
    out = tmp_path / "run"
    assert cli.main(["nbody", "--config", cfg, "--out", str(out)]) == 0
    names = {f["name"] for f in read_manifest(out)["files"]}
    assert "snapshots/state_t1.x.bin" in names
    assert "snapshots/final.x.bin" in names
    head = json.loads((out / "snapshots" / "state_t1.json").read_text())
    assert head["n_traj"] == 2 and head["n_particles"] == 8


def test_console_entry_point(tmp_path):
    out = tmp_path / "run"
    proc = subprocess.run(["selforg", "steady", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "manifest.json").exists()
    proc = subprocess.run(["selforg", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "selforg" in proc.stdout
