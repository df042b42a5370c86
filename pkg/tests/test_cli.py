import json

import pytest

from planar_sps import __version__
from planar_sps.cli import ConfigError, main, read_config_file
from planar_sps.io import read_csv, read_field

QUICK_GS = ["--c", "0.1", "--L", "24", "--n", "64"]


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["groundstate", "--c", "0.6", "--rho", "0.5"],
    ["groundstate", "--rho", "1.2"],
    ["groundstate", "--kind", "exp_b", "--p", "3"],
    ["frobnicate"],
    ["evolve", "--dt", "abc"],
])
def test_configuration_errors_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "o")]) == 2


def test_unknown_config_key_exits_2(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("c = 0.1\nmass = 3\n")
    assert main(["groundstate", "--config", str(conf), "--out", str(tmp_path)]) == 2
    assert "unknown key 'mass'" in capsys.readouterr().err


def test_config_file_parsing(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nc = 0.1   # trailing\nmax-iter = 10\n\n")
    assert read_config_file(conf) == {"c": "0.1", "max_iter": "10"}
    conf.write_text("c 0.1\n")
    with pytest.raises(ConfigError):
        read_config_file(conf)


def test_flags_override_config_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("c = 0.2\nL = 24\nn = 64\n")
    out = tmp_path / "gs"
    assert main(["groundstate", "--config", str(conf), "--c", "0.1", "--out", str(out)]) == 0
    doc = _summary(out)
    assert doc["result"]["c"] == 0.1
    assert doc["result"]["config"]["n"] == 64


def test_groundstate_writes_outputs_and_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["groundstate", *QUICK_GS, "--out", str(a)]) == 0
    assert main(["groundstate", *QUICK_GS, "--out", str(b)]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    doc = _summary(a)
    assert doc["schema"] == "planar-sps/1" and doc["kind"] == "groundstate"
    assert read_field(a / "u_c").grid.n == 64
    meta = json.loads((a / "metadata.json").read_text())
    assert "timestamp" in meta


def test_evolve_from_seed_and_from_field(tmp_path):
    out = tmp_path / "ev"
    args = ["evolve", "--c", "0.2", "--kick", "0.3", "--n", "64", "--T", "0.01", "--out"]
    assert main(args + [str(out)]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert list(rows[0]) == ["t", "mass", "energy", "dist", "max_modulus"]
    again = tmp_path / "ev2"
    assert main(["evolve", "--field", str(out / "psi_final"), "--n", "64", "--T", "0.01",
                 "--out", str(again)]) == 0


def test_verify_flags_underresolved_grid(tmp_path):
    # h = 0.375 cannot resolve the corpus dilations
    assert main(["verify", "--n", "64", "--out", str(tmp_path)]) == 1


def test_evolve_missing_field_exits_2(tmp_path):
    assert main(["evolve", "--field", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 2


def test_verify_and_oracle_pass(tmp_path):
    assert main(["verify", "--out", str(tmp_path / "v")]) == 0
    assert _summary(tmp_path / "v")["kind"] == "verify"
    assert (tmp_path / "v" / "report.txt").exists()
    assert main(["oracle", "--n", "128", "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "oracle.csv")
    assert all(r["passed"] == "true" for r in rows)


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--masses", "0.2,0.1", "--L", "24", "--n", "64", "--workers", "1",
                 "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert [float(r["c"]) for r in rows] == [0.1, 0.2]
