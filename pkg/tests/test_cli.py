import json
import subprocess
import sys

import pytest

from schemata.cli import EXIT_INPUT, EXIT_OK, corpus_names, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_corpus_is_shipped():
    assert {"example1", "example2", "adder", "adder_zero", "nested", "multiplier", "chain_shifted"} <= set(corpus_names())


def test_solve_prints_one_verdict(capsys):
    code, out, err = run(capsys, "solve", "corpus:example2")
    assert code == EXIT_OK
    assert out.splitlines() == ["VERDICT: UNSAT"]
    assert "loops=" in err


def test_modes(capsys):
    assert run(capsys, "solve", "corpus:adder", "--mode", "strategy", "-q")[1].startswith("VERDICT: SAT n=")
    assert run(capsys, "solve", "corpus:example2", "--mode", "enumerate", "--nmax", "4")[1].strip() == \
        "VERDICT: UNKNOWN unsat-up-to 4"
    assert run(capsys, "solve", "corpus:nested", "--budget", "20")[1].strip() == "VERDICT: UNKNOWN budget"


def test_emit_proof_and_dimacs(capsys, tmp_path):
    proof, cnf = tmp_path / "p.json", tmp_path / "g.cnf"
    code, _, _ = run(capsys, "solve", "corpus:example2", "--emit-proof", str(proof), "--emit-dimacs", "3", str(cnf))
    assert code == EXIT_OK
    assert json.loads(proof.read_text())["loops"]
    assert "p cnf" in cnf.read_text()
    dot = tmp_path / "p.dot"
    run(capsys, "solve", "corpus:nested", "--mode", "strategy", "--emit-proof", str(dot), "--format", "dot")
    assert "k=1" in dot.read_text()


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "corpus:nested")
    assert code == EXIT_OK and json.loads(out)["regularly_nested"] is True


def test_ground(capsys):
    code, out, _ = run(capsys, "ground", "corpus:example2", "--n", "2")
    assert code == EXIT_OK and out.splitlines()[-1] == "UNSAT"
    code, out, _ = run(capsys, "ground", "corpus:adder", "--n", "2", "--dimacs")
    assert out.startswith("c ")


@pytest.mark.parametrize("text,msg", [
    ("schema s { params: n; constraint: n >= 0; pattern: p[1] /\\ }", "parse error"),
    ("schema s { params: n; constraint: n >= 0; pattern: And i in {i >= 1}: p[i] }", "ill-formed"),
])
def test_bad_input_exit_code(capsys, tmp_path, text, msg):
    f = tmp_path / "bad.sch"
    f.write_text(text)
    code, out, err = run(capsys, "solve", str(f))
    assert code == EXIT_INPUT and out == "" and msg in err


def test_missing_file(capsys):
    assert run(capsys, "solve", "/nonexistent/x.sch")[0] == EXIT_INPUT


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "schemata.cli", "solve", "corpus:chain_shifted", "-q"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and r.stdout.strip() == "VERDICT: UNSAT"
