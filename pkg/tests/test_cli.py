from __future__ import annotations

import json
import subprocess
import sys

from jetvanish.cli import main
from jetvanish.constraints import read_system
from jetvanish.runner import CaseConfig, build_pipeline


def _config(tmp_path, name="case.json", **kw):
    args = dict(case_kind="logarithmic", d=7, m=3, t=1)
    args.update(kw)
    path = tmp_path / name
    path.write_text(json.dumps(CaseConfig(**args).to_dict()))
    return str(path)


def test_run_exits_zero_on_vanishing(tmp_path, capsys):
    cfg = _config(tmp_path)
    report = tmp_path / "out" / "r.json"
    assert main(["run", "--config", cfg, "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["verdict"] == "VANISHES_OVER_Q"
    assert json.loads(capsys.readouterr().out)["config_hash"] == data["config_hash"]


def test_prime_override_and_bad_prime(tmp_path, capsys):
    cfg = _config(tmp_path)
    assert main(["run", "--config", cfg, "--prime", "1000003"]) == 0
    assert json.loads(capsys.readouterr().out)["config"]["primes"] == [1000003]
    assert main(["run", "--config", cfg, "--prime", "7"]) == 64
    assert main(["run", "--config", cfg, "--prime", "10"]) == 64


def test_usage_errors_exit_64(tmp_path):
    assert main(["run"]) == 64
    assert main(["frobnicate"]) == 64
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 64
    assert main(["batch", "--preset", "no-such-table"]) == 64
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": {"case_kind": "compact", "d": 17}, "m": 13, "t": 3}))
    assert main(["run", "--config", str(bad)]) == 64


def test_witness_and_verify(tmp_path, capsys):
    out = tmp_path / "fermat.report.json"
    cfg = _config(tmp_path, case_kind="compact", d=11, m=3, t=2, deformation=[], mode="witness",
                  output=str(out))
    assert main(["run", "--config", cfg]) == 10
    witness = tmp_path / "fermat.report.witness.json"
    assert witness.exists()
    capsys.readouterr()
    assert main(["verify", "--config", cfg, "--witness", str(witness)]) == 10
    assert json.loads(capsys.readouterr().out)["status"] == "VERIFIED"
    # tamper with one coefficient
    data = json.loads(witness.read_text())
    key = next(iter(data["vectors"][0]))
    data["vectors"][0][key] = int(data["vectors"][0][key]) + 1
    witness.write_text(json.dumps(data))
    assert main(["verify", "--config", cfg, "--witness", str(witness)]) == 70


def test_verify_zero_witness_is_inconclusive(tmp_path, capsys):
    cfg = _config(tmp_path)
    count = build_pipeline(CaseConfig("logarithmic", 7, 3, 1)).ansatz.num_unknowns
    w = tmp_path / "zero.json"
    w.write_text(json.dumps({"schema": "jetvanish.witness/1", "num_unknowns": count, "vectors": [{}]}))
    assert main(["verify", "--config", cfg, "--witness", str(w)]) == 20
    assert json.loads(capsys.readouterr().out)["status"] == "DEGENERATE"


def test_export_system(tmp_path, capsys):
    cfg = _config(tmp_path)
    out = tmp_path / "sys.txt"
    assert main(["export-system", "--config", cfg, "--out", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    system = read_system(str(out))
    assert system.num_unknowns == info["unknowns"] and system.total_rows == info["rows"]
    assert system.system_hash() == info["system_hash"]


def test_batch_from_file_and_preset(tmp_path, capsys):
    cases = [CaseConfig("logarithmic", 7, 3, 1).to_dict(), CaseConfig("compact", 5, 3, 1).to_dict()]
    batch = tmp_path / "batch.json"
    batch.write_text(json.dumps({"cases": cases}))
    out = tmp_path / "runs"
    assert main(["batch", "--config", str(batch), "--out", str(out)]) == 0
    rows = json.loads(capsys.readouterr().out)["cases"]
    assert [r["verdict"] for r in rows] == ["VANISHES_OVER_Q"] * 2
    assert len(list(out.glob("*.report.json"))) == 2
    assert main(["batch", "--config", str(batch), "--out", str(out)]) == 0
    assert all(r["resumed"] for r in json.loads(capsys.readouterr().out)["cases"])
    assert main(["batch", "--preset", "log-d12", "--m-max", "3"]) == 0
    rows = json.loads(capsys.readouterr().out)["cases"]
    assert [(r["m"], r["t"], r["verdict"]) for r in rows] == [(3, 2, "VANISHES_OVER_Q")]


def test_console_script_entry_point(tmp_path):
    cfg = _config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "jetvanish.cli", "run", "--config", cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "VANISHES_OVER_Q" in proc.stdout
