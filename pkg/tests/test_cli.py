import json
import subprocess
import sys

import pytest

from stabkit import harness
from stabkit.cli import fmt, main
from stabkit.model import save
from fractions import Fraction


@pytest.fixture
def three_halves(tmp_path):
    p = tmp_path / "th.json"
    save(harness.gen_three_halves_lb(), p)
    return str(p)


def test_fmt():
    assert fmt(Fraction(19, 12)) == "19/12 (1.58333333333)"
    assert fmt(Fraction(3)) == "3"
    assert fmt(float("inf")) == "inf"


def test_verify_three_halves(capsys):
    assert main(["verify", "three-halves"]) == 0
    out = capsys.readouterr().out
    assert "LP=2 OPT=3" in out


def test_verify_claims(capsys):
    assert main(["verify", "claim2"]) == 0
    assert main(["verify", "claim3", "--json"]) == 0
    data = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert data["pass"] is True


def test_analyze_recurrence(capsys):
    assert main(["analyze", "recurrence", "--k", "4"]) == 0
    assert "19/12" in capsys.readouterr().out
    assert main(["analyze", "recurrence", "--k", "3"]) == 2


def test_recurrence_k5_flags_discrepancy(capsys):
    assert main(["analyze", "recurrence", "--k", "5", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["gamma_star"] == "8/5"
    assert "5/4" in data["note"]


def test_analyze_targets(capsys, tmp_path):
    csv_path = tmp_path / "mu.csv"
    assert main(["analyze", "mu-bar", "--csv", str(csv_path)]) == 0
    assert csv_path.read_text().startswith("z,mu_bar")
    assert main(["analyze", "limitation", "--grid", "101"]) == 0
    assert main(["analyze", "claims"]) == 0
    assert main(["analyze", "lemma2", "--window", "5"]) == 0
    assert "119/60" in capsys.readouterr().out
    assert main(["analyze", "lemma2"]) == 2
    assert main(["analyze", "audit", "--k", "4", "--window", "5", "--trials", "5"]) == 0


def test_solve_and_exact(capsys, three_halves):
    assert main(["solve", "-i", three_halves]) == 0
    assert "z* = 2" in capsys.readouterr().out
    assert main(["solve", "-i", three_halves, "--float", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["lp_value"] == 2.0
    assert main(["exact", "-i", three_halves, "--cap", "24"]) == 0
    assert "OPT = 3" in capsys.readouterr().out
    assert main(["exact", "-i", three_halves, "--cap", "2"]) == 2


def test_round_methods(capsys, three_halves, tmp_path):
    assert main(["round", "-i", three_halves, "--method", "unitsq", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["ratio"] == "3/2"
    assert main(["round", "-i", three_halves, "--method", "gaur"]) == 0
    assert main(["round", "-i", three_halves, "--method", "ks"]) == 2
    seg = tmp_path / "seg.json"
    save(harness.gen_random("horizsegstab", 10, 8, 1), seg)
    for m in ("ks", "segstab"):
        for mode in ("random", "derand"):
            assert main(["round", "-i", str(seg), "--method", m, "--mode", mode, "--seed", "4"]) == 0


def test_usage_errors(capsys, tmp_path):
    assert main([]) == 2
    assert main(["solve"]) == 2
    assert main(["solve", "-i", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["solve", "-i", str(bad)]) == 2
    assert main(["round", "-i", str(bad), "--method", "gaur", "--unknown"]) == 2
    assert "error" in capsys.readouterr().err


def test_gen_and_gap(tmp_path, capsys):
    out = tmp_path / "i.json"
    assert main(["gen", "--kind", "segstab", "--rects", "6", "--lines", "8", "--seed", "2", "-o", str(out)]) == 0
    assert main(["solve", "-i", str(out)]) == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "unitsqrstab", "trials": 3, "n_lines": 8, "n_rects": 8}))
    csv_path = tmp_path / "gap.csv"
    assert main(["gap", "--config", str(cfg), "--csv", str(csv_path)]) == 0
    assert csv_path.read_text().splitlines()[0].startswith("instance_id,kind")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    assert main(["gap", "--config", str(bad)]) == 2


def test_stdout_is_byte_identical(three_halves):
    cmd = [sys.executable, "-m", "stabkit", "round", "-i", three_halves, "--method", "unitsq",
           "--mode", "random", "--seed", "5"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_console_entry_point_exit_code():
    r = subprocess.run([sys.executable, "-m", "stabkit", "verify", "three-halves"], capture_output=True)
    assert r.returncode == 0
