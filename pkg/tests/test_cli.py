import json
import subprocess
import sys

import pytest

from hlb.cli import main


def run_cli(*argv):
    return main(list(argv))


def test_list_plain(capsys):
    assert run_cli("list") == 0
    out = capsys.readouterr().out
    assert "hysteretic two-fold" in out
    assert out.count("\n") == 22  # header + 21 rows


def test_list_json(tmp_path):
    out = tmp_path / "entries.json"
    assert run_cli("list", "--json", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert len(doc) == 21
    assert doc[0]["id"] == "H"
    assert doc[-1]["expected_a"] == "1"


def test_verify_unknown_id_exits_2(capsys):
    assert run_cli("verify", "--id", "99") == 2


def test_bad_flags_exit_2():
    assert run_cli("verify") == 2
    assert run_cli("nonsense") == 2


def test_verify_single_entry(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code = run_cli("verify", "--id", "H", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert doc["all_passed"] is True
    (rep,) = doc["entries"]
    assert rep["id"] == "H"
    assert abs(rep["fit"]["a_hat"] - 0.5) <= 0.05


def test_sweep_csv_and_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ("sweep", "--id", "H", "--mu-min", "1e-3", "--mu-max", "1e-2",
            "--points", "4")
    assert run_cli(*args, "--out", str(a)) == 0
    assert run_cli(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().strip().split("\n")
    assert lines[0] == "mu,amplitude,period,x_max,multiplier,converged"
    assert len(lines) == 5
    assert all(len(l.split(",")) == 6 for l in lines)


def test_sweep_fit_json(tmp_path):
    csv = tmp_path / "s.csv"
    fit = tmp_path / "fit.json"
    code = run_cli("sweep", "--id", "H", "--mu-min", "1e-4", "--mu-max",
                   "1e-2", "--points", "5", "--out", str(csv),
                   "--fit-out", str(fit))
    assert code == 0
    doc = json.loads(fit.read_text())
    assert abs(doc["a_hat"] - 0.5) < 0.02
    assert doc["entry"] == "H"


def test_portrait_round_trip(tmp_path):
    out = tmp_path / "p.json"
    code = run_cli("portrait", "--id", "3", "--mu-neg=-1e-2",
                   "--mu-pos", "1e-2", "--t-end", "30", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert doc["entry"] == "3"
    assert len(doc["records"]) == 2
    neg, pos = doc["records"]
    assert neg["mu"] < 0 < pos["mu"]
    # the positive side carries a cycle with a sliding marker
    assert pos["cycle"] is not None
    kinds = {e["kind"] for e in pos["cycle"]["events"]}
    assert "sliding_entry" in kinds
    assert pos["sliding_regions"]
    # the negative side still reports equilibria
    assert neg["cycle"] is None
    assert neg["equilibria"]


def test_portrait_impacting_entry_has_coexisting_focus(tmp_path):
    out = tmp_path / "p11.json"
    assert run_cli("portrait", "--id", "11", "--mu-pos", "1e-2",
                   "--mu-neg=-1e-2", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    pos = doc["records"][1]
    assert pos["cycle"] is not None
    assert any(e["kind"] == "unstable_focus" and e["admissibility"] == "admissible"
               for e in pos["equilibria"])


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "hlb.cli", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "Hopf" in proc.stdout
