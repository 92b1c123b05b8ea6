import json
import subprocess
import sys

import pytest

from optcert.cli import main
from optcert.corpus import corpus_dir


def run(*argv):
    proc = subprocess.run([sys.executable, "-m", "optcert.cli", *argv], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def corpus(name):
    return str(corpus_dir() / f"{name}.json")


def test_example_one_exit_fails():
    code, out, _ = run("check", corpus("ex1_piecewise_equality"), "--check", "fj-smooth")
    rep = json.loads(out)
    assert code == 1 and rep["records"][0]["status"] == "fails"
    assert rep["records"][0]["regularity_probe"]["h1"]["frechet_ok"] is True


def test_subdiff_exit_holds(capsys):
    assert main(["check", corpus("abs_min"), "--check", "subdiff:convex"]) == 0
    rec = json.loads(capsys.readouterr().out)["records"][0]
    assert sorted(rec["set"]) == [["-1"], ["1"]]


def test_inconclusive_exit(tmp_path, capsys):
    doc = {"variables": ["x"], "point": ["0"], "objective": {"op": "add", "args": [
        {"op": "abs", "args": ["x"]}, {"op": "neg", "args": [{"op": "abs", "args": ["x"]}]}]}}
    f = tmp_path / "p.json"
    f.write_text(json.dumps(doc))
    assert main(["check", str(f), "--check", "fj-lipschitz"]) == 2


def test_input_errors_exit_three(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": ["x"], "objective": "1/0"}')
    assert main(["check", str(bad), "--check", "kkt"]) == 3
    assert "zero denominator" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.json"), "--check", "kkt"]) == 3
    assert main(["check"]) == 3
    assert main(["check", corpus("abs_min"), "--check", "nope"]) == 3


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("check", corpus("ex2_piecewise_exp"), "--check", "fj-smooth", "--json", str(a))
    run("check", corpus("ex2_piecewise_exp"), "--check", "fj-smooth", "--json", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_ekeland_subcommand(tmp_path, capsys):
    space = tmp_path / "chain.txt"
    space.write_text("3\n0 1 2\n1 0 1\n2 1 0\n")
    assert main(["ekeland", str(space), "--f", "3,1,0", "--z", "0", "--eps", "4", "--lambda", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["records"][0]["y"] == "2"
    assert main(["ekeland", str(space), "--f", "3,1", "--z", "0", "--eps", "4"]) == 3


@pytest.mark.parametrize("name", ["ekeland_chain", "setvalued_1d"])
def test_instance_kinds(name, capsys):
    check = "ekeland" if name.startswith("ekeland") else "fj-setvalued"
    assert main(["check", corpus(name), "--check", check]) == 0


def test_corpus_run_and_filter(capsys):
    assert main(["corpus", "run"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["mismatches"] == 0 and len(rep["instances"]) >= 30
    assert main(["corpus", "run", "--filter", "no-such-instance"]) == 0
    assert "warning" in capsys.readouterr().err
