"""Command-line interface: exit codes, outputs and weight inputs."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from dunklsphere import cli

FIX = Path(__file__).parent / "fixtures"


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_nodes_writes_json_and_csv(tmp_path):
    cfg = write_config(tmp_path, {"d": 2, "eps": 0.4})
    out = tmp_path / "out"
    assert cli.main(["nodes", "--config", str(cfg), "--out", str(out), "--csv"]) == 0
    doc = json.loads((out / "nodes.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["command"] == "nodes"
    assert (out / "nodes.csv").read_text().count("\n") > 1
    assert (out / "nodes.meta.json").exists()


def test_stdout_when_no_out_dir(tmp_path, capsys):
    cfg = write_config(tmp_path, {"kappa": [0.5, 0.5], "n": 3})
    assert cli.main(["kernel", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["command"] == "kernel"


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, {"d": 2, "eps": 0.4, "seed": 1})
    out = tmp_path / "o"
    assert cli.main(["nodes", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == 0
    assert json.loads((out / "nodes.json").read_text())["seed"] == 9


@pytest.mark.parametrize("cfg", [
    {"kappa": [0.5, 0.5], "r": 0.5, "p": 1, "q": 2},
    {"kappa": [-0.5, 0.5], "degree": 4},
    {"degree": 4},
    {"kappa": [0.5, 0.5], "d": 3, "degree": 4},
])
def test_invalid_config_exit_1(tmp_path, cfg):
    command = "sobolev-upper" if "r" in cfg else "cubature"
    path = write_config(tmp_path, dict(cfg, n_grid=[16, 64]))
    assert cli.main([command, "--config", str(path)]) == 1


def test_malformed_json_exit_1(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["nodes", "--config", str(path)]) == 1


def test_missing_root_file_exit_1(tmp_path):
    path = write_config(tmp_path, {"root_system": "nowhere.roots", "degree": 4})
    assert cli.main(["cubature", "--config", str(path)]) == 1


def test_unreachable_tolerance_exit_2(tmp_path):
    path = write_config(tmp_path, {"kappa": [0.5, 0.5], "n": 3, "trials": 10,
                                   "tolerances": {"mz_high": 0.5}})
    status, result = cli.run("mz", json.loads(path.read_text()), 0, tmp_path / "o")
    assert status == 2
    assert result["result"]["failures"]
    assert (tmp_path / "o" / "mz.json").exists()
    assert cli.main(["mz", "--config", str(path)]) == 2


def test_infeasible_exit_3(tmp_path):
    path = write_config(tmp_path, {"kappa": [0.5, 0.5], "degree": 6, "tol": 1e-30})
    assert cli.main(["cubature", "--config", str(path)]) == 3


def test_root_system_file_and_inline_text_agree(tmp_path):
    text = (FIX / "b2.roots").read_text()
    (tmp_path / "b2.roots").write_text(text)
    a = write_config(tmp_path, {"root_system": "b2.roots", "degree": 6, "trials": 10}, "a.json")
    b = write_config(tmp_path, {"root_system_text": text, "degree": 6, "trials": 10}, "b.json")
    assert cli.main(["cubature", "--config", str(a), "--out", str(tmp_path / "A")]) == 0
    assert cli.main(["cubature", "--config", str(b), "--out", str(tmp_path / "B")]) == 0
    assert (tmp_path / "A" / "cubature.json").read_bytes() == (tmp_path / "B" / "cubature.json").read_bytes()


def test_unsupported_group_for_kernel_exit_1(tmp_path):
    path = write_config(tmp_path, {"root_system_text": (FIX / "b2.roots").read_text(), "n": 3})
    assert cli.main(["kernel", "--config", str(path)]) == 1


def test_module_entry_point(tmp_path):
    path = write_config(tmp_path, {"d": 2, "eps": 0.5})
    proc = subprocess.run([sys.executable, "-m", "dunklsphere", "nodes", "--config", str(path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema_version"] == 1
