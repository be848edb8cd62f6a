import json
import math
import subprocess
import sys

import numpy as np
import pytest

from kuramoto_pin import build_graph, load_records, save_graph
from kuramoto_pin.cli import main
from helpers import cycle3


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_generate_select_round_trip(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    code, _ = run(
        capsys, "generate", "--kind", "directed-oriented", "--nodes", "8",
        "--neg-fraction", "0.3", "--seed", "5", "--out", str(gpath),
    )
    assert code == 0
    spath = tmp_path / "sel.json"
    code, out = run(
        capsys, "select", "--graph", str(gpath), "--algorithm", "submodular",
        "--samples", "400", "--seed", "1", "--out", str(spath),
    )
    assert code == 0
    payload = json.loads(spath.read_text())
    assert payload == json.loads(out)
    assert payload["delta"] == 0.0  # auto resolves to 0 for identical omega
    assert payload["lambda_min"] > 0.0


def test_select_rejects_bad_delta(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    save_graph(gpath, cycle3())
    assert main(["select", "--graph", str(gpath), "--delta", "-1"]) == 2
    assert main(["select", "--graph", str(gpath), "--delta", "soon"]) == 2
    assert main(["select", "--graph", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_simulate_writes_everything(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    save_graph(gpath, build_graph(2, [(1, 2, 1.0)]), omega=[0.0, 0.5])
    out = tmp_path / "traj.csv"
    code, text = run(
        capsys, "simulate", "--graph", str(gpath), "--inputs", "1",
        "--horizon", "60", "--out", str(out),
    )
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "t,theta_1,theta_2"
    assert len(rows) == 6002
    final_theta2 = float(rows[-1].split(",")[2])
    assert final_theta2 == pytest.approx(math.asin(0.5), abs=1e-4)
    diag = json.loads((tmp_path / "traj.csv.diagnostics.json").read_text())
    assert diag == json.loads(text)
    assert diag["inputs"] == [1]
    assert diag["frequency_sync"]["ok"] is True
    assert diag["phase_sync"]["ok"] is False
    assert diag["bounds"]["intervals_ok"] is True
    assert (tmp_path / "traj.png").exists()


def test_simulate_infeasible_sample_is_runtime_error(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    save_graph(gpath, build_graph(2, [(1, 2, 1.0), (2, 1, -1.0)]))
    out = tmp_path / "t.csv"
    code = main(
        ["simulate", "--graph", str(gpath), "--theta0", "sampled", "--out", str(out)]
    )
    assert code == 3
    assert "infeasible" in capsys.readouterr().err
    assert not out.exists()


def test_simulate_theta0_file_and_validation(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    save_graph(gpath, cycle3())
    th = tmp_path / "theta0.json"
    th.write_text(json.dumps([0.0, 0.2, -0.2]))
    out = tmp_path / "t.csv"
    code, _ = run(
        capsys, "simulate", "--graph", str(gpath), "--theta0", f"file:{th}",
        "--horizon", "5", "--out", str(out), "--no-figures",
    )
    assert code == 0
    assert not (tmp_path / "t.png").exists()
    assert main(
        ["simulate", "--graph", str(gpath), "--theta0", "warm", "--out", str(out)]
    ) == 2
    capsys.readouterr()


def test_check_reports_both_verdicts(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    save_graph(gpath, cycle3())
    code, out = run(capsys, "check", "--graph", str(gpath))
    assert code == 0
    payload = json.loads(out)
    assert payload["lp_feasible"] is True
    assert payload["parity_ok"] is False  # conservative sign-count verdict


def test_sweep_and_report(tmp_path, capsys):
    cfg = {
        "graph_kind": "directed-oriented",
        "grid": [0.0, 0.3],
        "n": 6,
        "realizations": 2,
        "sample_count": 200,
    }
    cpath = tmp_path / "cfg.json"
    cpath.write_text(json.dumps(cfg))
    out = tmp_path / "rows.csv"
    code, _ = run(capsys, "sweep", "--config", str(cpath), "--out", str(out))
    assert code == 0
    assert len(load_records(out)) == 16
    assert (tmp_path / "rows.csv.summary.json").exists()
    assert (tmp_path / "rows.png").exists()

    figdir = tmp_path / "figs"
    code, text = run(
        capsys, "report", "--results", str(out), "--out-dir", str(figdir)
    )
    assert code == 0
    summary = json.loads(text)
    assert summary["gap_count"] == 4
    assert summary["figures"] == [str(figdir / "sweep_directed-oriented.png")]
    assert (figdir / "sweep_directed-oriented.png").exists()


def test_sweep_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    bad.write_text(json.dumps({"graph_kind": "lattice"}))
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    capsys.readouterr()


def test_audit_summary(tmp_path, capsys):
    log = tmp_path / "disc.jsonl"
    code, out = run(capsys, "audit", "--min-len", "3", "--max-len", "4", "--log", str(log))
    assert code == 0
    summary = json.loads(out)
    assert summary["patterns"] == 24
    assert len(summary["discrepancies"]) == 5
    assert summary["log_path"] == str(log)
    assert len(log.read_text().splitlines()) == 5


def test_installed_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "kuramoto_pin.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("kuramoto-pin ")


def test_report_requires_rows(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    from kuramoto_pin import emit_results

    emit_results([], empty)
    assert main(["report", "--results", str(empty)]) == 2
    capsys.readouterr()
