from __future__ import annotations

import csv
import json
import math
import shutil
import subprocess

import pytest

from qcorr.cli import main, parse_angle


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text, value", [("pi/3", math.pi / 3), ("2pi/3", 2 * math.pi / 3),
                                         ("-0.5*pi", -math.pi / 2), ("1.25", 1.25), ("pi", math.pi)])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_demo_qubit_report(capsys, tmp_path):
    code, out, _ = run(capsys, "demo-qubit", "--theta", "pi/3", "--bloch", "1,0,0")
    assert code == 0
    rep = json.loads(out)
    assert rep["numeric"]["tv"] == pytest.approx(math.sin(math.pi / 3))
    code, _, _ = run(capsys, "demo-qubit", "--grid", "5", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "qubit_report.json").exists()
    rows = list(csv.DictReader((tmp_path / "surface.csv").open()))
    assert len(rows) > 0 and {"x", "z", "tv", "lower", "upper"} <= set(rows[0])


def test_demo_qubit_rejects_outside_ball(capsys):
    code, _, err = run(capsys, "demo-qubit", "--bloch", "1,1,0")
    assert code == 2 and "error" in err


def test_lg_scan_summary_and_csv(capsys, tmp_path):
    out_csv = tmp_path / "scan.csv"
    code, out, _ = run(capsys, "lg-scan", "--rep", "kd", "--n", "81", "--out", str(out_csv))
    assert code == 0
    kv = dict(p.split("=") for p in out.split())
    assert float(kv["K_max"]) == pytest.approx(1.5, abs=1e-12)
    assert float(kv["t"]) == pytest.approx(math.pi / 3)
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 81 * 81
    assert list(rows[0]) == ["t", "T", "C12", "C23", "C13", "K", "mode", "defined"]


def test_lg_scan_ss_restricted(capsys, tmp_path):
    out_csv = tmp_path / "ss.csv"
    code, out, _ = run(capsys, "lg-scan", "--rep", "ss", "--n", "41", "--restrict-spectrum",
                       "--out", str(out_csv))
    assert code == 0
    kv = dict(p.split("=") for p in out.split())
    assert float(kv["K_max"]) == pytest.approx(1.0, abs=1e-12)
    row = next(csv.DictReader(out_csv.open()))
    assert "midpoint_excluded" in row and row["mode"] == "QUASI(SS)+SPECTRUM"
    code, out, _ = run(capsys, "lg-scan", "--rep", "ss", "--n", "81")
    kv = dict(p.split("=") for p in out.split())
    assert float(kv["K_max"]) == pytest.approx(1.5, abs=1e-12)
    assert float(kv["closed_form_max_residual"]) < 1e-9


def test_audit_exit_codes(capsys, tmp_path):
    path = tmp_path / "audit.jsonl"
    code, out, _ = run(capsys, "audit", "--ineq", "corr_upper,prob_lower", "--trials", "20",
                       "--dims", "2,3", "--out", str(path))
    assert code == 0
    assert "CORR_UPPER n=20 failures=0" in out
    assert len(path.read_text().splitlines()) == 40
    code, _, _ = run(capsys, "audit", "--ineq", "nope")
    assert code == 2
    code, _, _ = run(capsys, "audit")
    assert code == 2
    # a negative audit tolerance turns the exact duality into a reported failure
    code, _, err = run(capsys, "audit", "--ineq", "inv_delta_duality", "--trials", "3", "--tol-audit", "-1")
    assert code == 1 and err.startswith("FAIL INV_DELTA_DUALITY")


def test_audit_qubit_grid(capsys):
    code, out, _ = run(capsys, "audit", "--ineq", "prob_order_lower", "--qubit-grid")
    assert code == 0
    assert "PROB_ORDER_LOWER n=2500 failures=0" in out


def test_sample_reproducible(capsys):
    code, first, _ = run(capsys, "sample", "--n", "20000", "--seed", "7")
    assert code == 0
    _, second, _ = run(capsys, "sample", "--n", "20000", "--seed", "7")
    assert first == second
    rows = list(csv.DictReader(first.splitlines()))
    assert sum(int(r["count"]) for r in rows) == 20000
    assert all(abs(float(r["z"])) < 5 for r in rows)
    assert run(capsys, "sample", "--n", "0")[0] == 2


def test_sample_seed_from_env(capsys, monkeypatch):
    monkeypatch.setenv("QCORR_SEED", "11")
    _, env_out, _ = run(capsys, "sample", "--n", "1000")
    _, flag_out, _ = run(capsys, "sample", "--n", "1000", "--seed", "11")
    assert env_out == flag_out
    monkeypatch.setenv("QCORR_SEED", "eleven")
    assert run(capsys, "sample", "--n", "10")[0] == 2


def test_weak_value_precession(capsys):
    code, out, _ = run(capsys, "weak-value", "--precession")
    assert code == 0
    rep = json.loads(out)
    assert rep["re"] == pytest.approx(2.0, abs=1e-10)
    assert rep["anomalous"] is True
    assert rep["kd_conditional"]["re"] == pytest.approx(rep["re"], abs=1e-12)


def test_weak_value_files(capsys, tmp_path):
    (tmp_path / "pre.json").write_text(json.dumps({"dim": 2, "re": [1, 0], "im": [0, 0]}))
    (tmp_path / "post.json").write_text(json.dumps([0, 1]))
    (tmp_path / "obs.json").write_text(json.dumps({"dim": 2, "re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}))
    code, out, _ = run(capsys, "weak-value", "--pre", str(tmp_path / "pre.json"),
                       "--post", str(tmp_path / "post.json"), "--obs", str(tmp_path / "obs.json"))
    assert code == 0
    assert json.loads(out)["undefined"] is True
    code, _, _ = run(capsys, "weak-value", "--pre", str(tmp_path / "missing.json"),
                     "--post", str(tmp_path / "post.json"), "--obs", str(tmp_path / "obs.json"))
    assert code == 2


def test_bad_arguments(capsys):
    assert run(capsys, "lg-scan", "--mode", "nope")[0] == 2
    assert run(capsys, "demo-qubit", "--theta", "abc")[0] == 2
    assert run(capsys, "lg-scan", "--rep", "wigner", "--n", "3")[0] == 2


@pytest.mark.skipif(shutil.which("qcorr") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["qcorr", "weak-value", "--precession"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["re"] == pytest.approx(2.0, abs=1e-10)
