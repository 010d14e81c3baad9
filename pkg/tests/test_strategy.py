import json
import random

import pytest

from schemata import linarith as la
from schemata.cli import corpus_text
from schemata.generate import regularly_nested
from schemata.schema import Schema, big_and, big_or, lit, mk_and
from schemata.strategy import StrategyOptions, classify, is_alignment_node, run_strategy
from schemata.syntax import parse_problem
from schemata.tableau import Sat, Unsat

n, i, j = la.var("n"), la.var("i"), la.var("j")


def corpus(name: str) -> Schema:
    return parse_problem(corpus_text(name))


@pytest.mark.parametrize("name,aligned", [
    ("example2", [1, 0]), ("nested", [1, 0]), ("adder", [1, 0]), ("adder_zero", [1, 0]), ("chain_shifted", [1, 1]),
])
def test_regularly_nested_corpus(name, aligned):
    r = classify(corpus(name))
    assert r.regularly_nested
    assert json.loads(r.to_json())["aligned"] == aligned


def test_outside_the_class():
    m = classify(corpus("multiplier"))
    assert not m.monadic and not m.regularly_nested
    assert not classify(corpus("example1")).framed
    two = Schema(big_and("i", la.frame("i", 1, n), lit("p", i * 2)), la.ge(n, 0), ("n",))
    assert not classify(two).arithmetic
    mixed = Schema(mk_and(big_and("i", la.frame("i", 1, n), lit("p", i)), big_or("j", la.frame("j", 0, n), lit("q", j))),
                   la.ge(n, 0), ("n",))
    r = classify(mixed)
    assert r.framed and r.aligned is None and r.relaxed_shapes["broadly_aligned"]
    assert not r.relaxed_shapes["down_aligned"] and r.relaxed_shapes["up_aligned"]


def test_strategy_verdicts():
    v = run_strategy(corpus("nested"))
    assert isinstance(v, Unsat)
    counts = v.tableau.counts()
    assert counts.get("intervalise", 0) == 0 and counts.get("emptiness", 0) == 0
    assert isinstance(run_strategy(corpus("adder")), Sat)


def test_alignment_nodes_follow_unfolding():
    v = run_strategy(corpus("nested"))
    nodes = v.tableau.nodes
    marked = [nd for nd in nodes if is_alignment_node(nd)]
    assert marked
    for nd in marked:
        assert nodes[nd.parent].rule == "instantiate"


def test_warns_outside_class():
    with pytest.warns(UserWarning):
        run_strategy(corpus("example1"), StrategyOptions(node_budget=2000))


def test_generated_family_terminates():
    rng = random.Random(2)
    for _ in range(15):
        s = regularly_nested(rng)
        assert classify(s).regularly_nested
        v = run_strategy(s, StrategyOptions(node_budget=100_000))
        assert isinstance(v, (Sat, Unsat))
