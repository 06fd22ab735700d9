import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from contactangle.cli import SCAN_HEADER, main


def run(*argv):
    return main([str(a) for a in argv])


def test_verify_legendrian(tmp_path):
    out = tmp_path / "r.json"
    assert run("verify", "legendrian-flat", "--grid", 32, "--tol", 1e-6, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["grid"] == 32 and rep["surface"] == {"kind": "builtin", "name": "legendrian-flat"}
    assert {"name", "hypotheses", "sup", "mean", "evaluated", "skipped", "verdict"} <= set(rep["identities"][0])
    assert any(r["verdict"] == "PASS" for r in rep["identities"])


def test_verify_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify", "great-sphere", "--grid", 16, "--out", a) == 0
    assert run("verify", "great-sphere", "--grid", 16, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_clifford_degenerate(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run("verify", "clifford-s3", "--out", out) == 3
    assert "BetaDegenerate" in capsys.readouterr().err
    text = out.read_text()
    assert "NaN" not in text and "Infinity" not in text
    assert json.loads(text)["degeneracy"]["status"] == "BetaDegenerate at every point"


def test_verify_failure_exit(tmp_path, capsys):
    assert run("verify", "legendrian-flat", "--grid", 8, "--tol", 1e-30, "--out", tmp_path / "r.json") == 2
    assert "FAIL" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["verify", "legendrian-flat", "--grid", "4"],
    ["verify", "legendrian-flat", "--grid", "1000"],
    ["verify", "legendrian-flat", "--tol", "0"],
    ["verify", "no-such-surface"],
    ["verify"],
    ["frobnicate"],
    ["torus", "solve", "--constraint", "c_zero"],
    ["torus", "solve", "--max-iter", "0"],
    ["scan", "--samples", "1"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_malformed_descriptor(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("verify", bad) == 1
    bad.write_text(json.dumps({"kind": "homogeneous", "params": {"r": [1, 0, 0], "M": [[1, 0, 0], [0, 1, 0]]}}))
    assert run("verify", bad) == 1
    bad.write_text(json.dumps({"kind": "spline"}))
    assert run("verify", bad) == 1


def test_unwritable_output(tmp_path):
    assert run("verify", "great-sphere", "--grid", 8, "--out", tmp_path / "missing" / "r.json") == 1


def test_homogeneous_descriptor(tmp_path):
    desc = tmp_path / "t.json"
    r = 1 / np.sqrt(3)
    desc.write_text(json.dumps({"kind": "homogeneous", "params": {"r": [r, r, r], "M": [[1, 0, -1], [0, 1, -1]]}}))
    assert run("verify", desc, "--grid", 8, "--out", tmp_path / "r.json") == 0


def test_torus_solve_b_zero(tmp_path):
    out, out2, circ = tmp_path / "t.json", tmp_path / "t2.json", tmp_path / "c.csv"
    argv = ["torus", "solve", "--constraint", "b_zero", "--beta", 1.2, "--seed", 42]
    assert run(*argv, "--out", out, "--circle-csv", circ) == 0
    assert run(*argv, "--out", out2) == 0
    assert out.read_bytes() == out2.read_bytes()
    payload = json.loads(out.read_text())
    assert payload["status"] == "converged"
    m = payload["measured"]
    assert m["H_max"] < 1e-8 and abs(m["circle_residual"]) < 1e-5
    rows = list(csv.reader(circ.read_text().splitlines()))
    assert rows[0] == ["beta", "a", "b", "residual"] and len(rows) == 2
    # the solved torus feeds straight back into verify
    assert run("verify", out, "--grid", 16, "--out", tmp_path / "r.json") == 0


def test_torus_solve_a_zero(tmp_path):
    out = tmp_path / "t.json"
    assert run("torus", "solve", "--constraint", "a_zero", "--beta", 0.9, "--seed", 42, "--out", out) == 0
    b = json.loads(out.read_text())["measured"]["b"]
    s2 = np.sin(0.9) ** 2
    roots = [(np.cos(0.9) + sgn * np.sqrt(2) * s2) / (1 + s2) for sgn in (-1, 1)]
    assert min(abs(b - x) for x in roots) < 1e-5


def test_torus_solve_infeasible(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert run("torus", "solve", "--constraint", "b_zero", "--beta", 0.5, "--out", out) == 5
    assert "infeasible" in capsys.readouterr().err
    assert not out.exists()


def test_torus_solve_no_convergence(tmp_path):
    out = tmp_path / "t.json"
    assert run("torus", "solve", "--constraint", "b_zero", "--beta", 1.2, "--seed", 42, "--max-iter", 1,
               "--out", out) == 4
    payload = json.loads(out.read_text())
    assert payload["status"] == "no_convergence" and payload["descriptor"]["kind"] == "homogeneous"


def test_scan(tmp_path):
    out, out2 = tmp_path / "s.csv", tmp_path / "s2.csv"
    assert run("scan", "--samples", 100, "--out", out) == 0
    assert run("scan", "--samples", 100, "--out", out2) == 0
    assert out.read_bytes() == out2.read_bytes()
    rows = list(csv.reader(out.read_text().splitlines()))
    assert tuple(rows[0]) == SCAN_HEADER and len(rows) == 101
    last = dict(zip(rows[0], rows[-1]))
    assert float(last["beta"]) == pytest.approx(np.pi / 2, abs=1e-15)
    assert abs(float(last["center"])) < 1e-15 and float(last["radius2"]) == pytest.approx(0.5, abs=1e-15)
    flags = [r[4] for r in rows[1:]]
    assert set(flags) == {"true", "false"}
    betas = np.array([float(r[0]) for r in rows[1:]])
    adm = np.array([f == "true" for f in flags])
    assert np.all(adm == (betas > np.pi / 4))


def test_scan_endpoints(capsys):
    assert run("scan", "--samples", 2) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 3 and float(rows[1][0]) == 0.05


def test_console_script(tmp_path):
    exe = shutil.which("contactangle")
    if exe is None:
        pytest.skip("console script not installed")
    res = subprocess.run([exe, "verify", "clifford-s3", "--grid", "8", "--out", str(tmp_path / "r.json")],
                         capture_output=True, text=True)
    assert res.returncode == 3
