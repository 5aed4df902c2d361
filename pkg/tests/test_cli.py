import io
import json
import subprocess
import sys

import pytest

from heckesums.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_delta_json():
    code, text = run("delta", "--k", "12", "--N", "1", "--m", "2", "--n", "1", "--tol", "1e-8")
    doc = json.loads(text)
    assert code == 0
    assert doc["schema"] == "1"
    assert {"value", "tail_bound", "converged"} <= set(doc)
    assert doc["value"] == pytest.approx(-1.5062898, abs=1e-6)


def test_tau_csv():
    code, text = run("tau", "--max", "10")
    lines = text.strip().splitlines()
    assert code == 0 and lines[0] == "n,tau" and lines[2] == "2,-24" and len(lines) == 11


def test_exit_codes(capsys):
    assert run("delta", "--k", "11", "--N", "1", "--m", "1", "--n", "1")[0] == 2
    assert run("delta", "--k", "12")[0] == 1
    assert run("nonsense")[0] == 1
    assert run()[0] == 1
    code, _ = run("delta", "--k", "4", "--N", "1", "--m", "1000000", "--n", "1000000",
                  "--cmax", "3")
    assert code == 3


def test_domain_error_exit():
    code, _ = run("besselj", "--nu", "3", "--x", "-1")
    assert code == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nk = 12\nN = 1\nm = 3\nn = 1\n")
    _, a = run("delta", "--config", str(cfg))
    _, b = run("delta", "--config", str(cfg), "--m", "2")
    assert json.loads(a)["m"] == 3 and json.loads(b)["m"] == 2
    cfg.write_text("unknown = 1\n")
    assert run("delta", "--config", str(cfg))[0] == 1


def test_density_and_rmt():
    code, text = run("density", "--k", "12", "--N", "101", "--sigma", "1", "--u", "0.5")
    doc = json.loads(text)
    assert code == 0
    assert set(doc["rmt"]) == {"U", "Sp", "O", "SOeven", "SOodd"}
    assert abs(doc["D1"] - doc["rmt"]["O"]) <= 0.2
    code, text = run("rmt", "--group", "Sp", "--sigma", "1")
    doc = json.loads(text)
    assert doc["time_side"] == pytest.approx(0.5) and doc["fourier_side"] == pytest.approx(0.5)


def test_density_grid(tmp_path):
    spec = tmp_path / "grid.txt"
    spec.write_text("k=12\nsigma=1\nu=0.5\nN=101,199\n")
    code, text = run("density-grid", "--spec", str(spec))
    lines = text.strip().splitlines()
    assert code == 0 and len(lines) == 3 and lines[0].startswith("k,N,")


def test_basis_command(tmp_path):
    data = tmp_path / "f.json"
    data.write_text(json.dumps({"k": 12, "M": 5, "lambda": {"2": 1.0, "3": -0.4},
                                "ramified_signs": {"5": -1}}))
    code, text = run("basis", "--eigen-data", str(data), "--L", "12")
    doc = json.loads(text)
    assert code == 0
    assert doc["xi_one_sum_direct"] == pytest.approx(doc["xi_one_sum_closed"], rel=1e-12)


def test_small_commands():
    assert json.loads(run("kloosterman", "--m", "1", "--n", "1", "--c", "3")[1])["value"] == pytest.approx(-1)
    assert json.loads(run("dim", "--k", "12", "--N", "2")[1])["dim_cusp"] == 2
    assert json.loads(run("newdim", "--k", "12", "--N", "11")[1])["newform_dim"] == 8
    doc = json.loads(run("card", "--k", "12", "--N", "7", "--Y", "200")[1])
    assert doc["rounded"] == doc["oracle_dim"] == 5
    doc = json.loads(run("puresum", "--k", "12", "--N", "1", "--n", "1", "--Y", "100")[1])
    assert doc["oracle_dim"] == 1 and "heuristic_bound" in doc


def test_manifest_and_determinism():
    argv = ["card", "--k", "12", "--N", "5", "--Y", "100", "--threads", "1", "--manifest"]
    a, b = run(*argv), run(*argv)
    assert a == b
    doc = json.loads(a[1])
    assert doc["manifest"]["parameters"]["Y"] == 100
    assert "numpy" in doc["manifest"]["versions"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "heckesums.cli", "tau", "--max", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.splitlines()[-1] == "3,252"
