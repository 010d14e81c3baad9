import json

import pytest

from schemata.cli import corpus_text
from schemata.export import export_proof, proof_dict, to_dot
from schemata.strategy import run_strategy
from schemata.syntax import parse_problem
from schemata.tableau import fair_solve


@pytest.fixture(scope="module")
def nested():
    return run_strategy(parse_problem(corpus_text("nested"))).tableau


def test_json_shape(nested):
    d = json.loads(export_proof(nested, "json"))
    assert set(d) == {"nodes", "edges", "loops"}
    assert d["nodes"][0]["rule"] is None
    assert {n["status"] for n in d["nodes"]} <= {"Open", "Closed", "LoopClosed", "Sat", "Stuck"}
    ids = {n["id"] for n in d["nodes"]}
    for e in d["edges"] + d["loops"]:
        assert e["from"] in ids and e["to"] in ids
    assert all(e["k"] >= 1 for e in d["loops"])


def test_every_leaf_is_closed_in_a_refutation(nested):
    d = proof_dict(nested)
    parents = {e["from"] for e in d["edges"]}
    leaves = [n for n in d["nodes"] if n["id"] not in parents]
    assert leaves and all(n["status"] in ("Closed", "LoopClosed") for n in leaves)


def test_dot_marks_loops(nested):
    dot = to_dot(nested)
    assert dot.startswith("digraph tableau {") and dot.rstrip().endswith("}")
    assert dot.count("style=dashed") == len(nested.loops)
    assert "↺" in dot and "×" in dot


def test_sat_export():
    v = fair_solve(parse_problem(corpus_text("example1")))
    d = proof_dict(v.tableau)
    assert any(n["status"] == "Sat" for n in d["nodes"])


def test_unknown_format(nested):
    with pytest.raises(ValueError):
        export_proof(nested, "xml")
