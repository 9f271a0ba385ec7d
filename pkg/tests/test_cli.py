import json
import subprocess
import sys

import pytest

from weylwalk import algebra, cli, harness
from weylwalk.walker import InvariantError


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_walk(capsys):
    code, out = run(["--seed", "7", "walk", "--group", "SL3", "--mode", "exact", "--length", "12"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["matrix"] == [[0, -1, -2], [0, 0, -1], [1, 2, 0]]
    assert obj["charpoly"] == list(algebra.charpoly_exact(obj["matrix"]))
    assert len(obj["steps"]) == 12


def test_galois_matrix_file(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text(algebra.write_matrix(algebra.as_int_matrix([[0, 0, 1], [1, 0, 1], [0, 1, 0]])))
    code, out = run(["galois", "--matrix", str(path), "--budget", "25", "--prime-min", "2"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["verdict"] == "ProvenFullWeyl"
    assert [o["p"] for o in obj["observations"] if o["status"] != "good"] == [23]


def test_survey_csv_and_jsonl(tmp_path, capsys):
    jl = tmp_path / "s.jsonl"
    argv = ["--seed", "3", "--format", "csv", "survey", "--group", "SL2", "--primes", "40",
            "--grid", "5:15:5", "--trials", "6", "--budget", "40", "--jsonl", str(jl)]
    code, out = run(argv, capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,trials,certified,fraction,wilson_lo,wilson_hi,mean_primes"
    assert len(lines) == 4
    assert len(jl.read_text().splitlines()) == 18
    first = jl.read_text()
    run(argv, capsys)
    assert jl.read_text() == first


def test_tau_and_out_file(tmp_path, capsys):
    out_path = tmp_path / "tau.json"
    code, out = run(["--seed", "1", "--out", str(out_path), "tau", "--group", "SL2", "--primes", "50",
                     "--trials", "5", "--n-max", "20", "--budget", "50"], capsys)
    assert code == 0 and out == ""
    obj = json.loads(out_path.read_text())
    assert len(obj["samples"]) == 5


def test_equidist(capsys):
    code, out = run(["equidist", "--group", "SL2", "--q", "5,7"], capsys)
    assert code == 0
    reports = json.loads(out)
    assert [r["total"] for r in reports] == [120, 336]


def test_chain(tmp_path, capsys):
    code, out = run(["--format", "csv", "chain", "--grid", "0:40:20", "--trials", "500"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "n,empirical,bound,beta"
    spec = tmp_path / "chain.json"
    spec.write_text(json.dumps({"states": [0, 1], "kernel": [["1/2", "1/2"], ["1/2", "1/2"]], "start": 0}))
    code, out = run(["chain", "--spec", str(spec), "--grid", "10,20", "--trials", "100"], capsys)
    assert code == 0 and json.loads(out)["beta"] == pytest.approx(1.0)


def test_torus_demo(capsys):
    code, out = run(["--format", "csv", "torus-demo", "--grid", "1,2"], capsys)
    assert code == 0
    assert out.splitlines()[1].startswith("1,0.333")


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.main(["walk", "--group", "SL1"]) == 2
    assert cli.main(["walk"]) == 2
    assert cli.main(["galois", "--matrix", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "chain.json"
    bad.write_text(json.dumps({"states": [0, 1], "kernel": [["1/2", "1/2"], ["1/3", "2/3"]]}))
    assert cli.main(["chain", "--spec", str(bad)]) == 2
    assert cli.main(["survey", "--group", "SL2", "--primes", "5", "--budget", "10", "--trials", "1"]) == 2
    capsys.readouterr()


def test_invariant_violation_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise InvariantError("exact and modular walk states disagree")

    monkeypatch.setattr(harness, "survey", boom)
    assert cli.main(["survey", "--group", "SL2", "--primes", "5", "--budget", "5", "--trials", "1"]) == 3
    capsys.readouterr()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "weylwalk", "torus-demo", "--grid", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["rows"][0]["prob"] == pytest.approx(1 / 3)
