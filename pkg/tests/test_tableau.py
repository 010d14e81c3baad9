import random

import pytest

from schemata import linarith as la
from schemata.cli import corpus_text
from schemata.generate import small_schema
from schemata.ground import evaluate_prop
from schemata.schema import Schema, big_and, lit, mk_and, realize
from schemata.syntax import parse_problem
from schemata.tableau import (
    Options, Prover, Sat, Unknown, Unsat, UnsatUpTo, enumerate_baseline, fair_solve, local_soundness_violations,
    loop_certificate_violations,
)

n, i = la.var("n"), la.var("i")


def corpus(name: str) -> Schema:
    return parse_problem(corpus_text(name))


def test_chain_is_refuted_by_a_loop():
    v = fair_solve(corpus("example2"), budget=500)
    assert isinstance(v, Unsat)
    assert any(c.shift == 1 for c in v.tableau.loops)
    assert local_soundness_violations(v.tableau) == []
    assert loop_certificate_violations(v.tableau) == []


def test_sat_verdict_carries_checked_model():
    v = fair_solve(corpus("example1"), budget=2000)
    assert isinstance(v, Sat)
    assert evaluate_prop(realize(corpus("example1"), v.env), v.model)
    assert v.line() == f"VERDICT: SAT n={v.env['n']}"


def test_budget_gives_unknown():
    v = fair_solve(corpus("nested"), budget=30)
    assert isinstance(v, Unknown) and v.reason == "budget"
    assert v.line() == "VERDICT: UNKNOWN budget"


def test_unsatisfiable_constraint():
    s = Schema(lit("p", n), la.conj(la.ge(n, 3), la.le(n, 1)), ("n",))
    assert isinstance(fair_solve(s), Unsat)


def test_ground_schema_without_parameters():
    s = Schema(mk_and(lit("p"), lit("p", positive=False)), la.TRUE, ())
    assert isinstance(fair_solve(s), Unsat)


def test_baseline():
    assert enumerate_baseline(corpus("example2"), 10) == UnsatUpTo(10)
    b = enumerate_baseline(Schema(big_and("i", la.frame("i", 1, n), lit("p", i)), la.ge(n, 2), ("n",)), 5)
    assert isinstance(b, Sat) and b.env == {"n": 2}


def test_agrees_with_baseline_on_fuzz():
    rng = random.Random(17)
    for _ in range(30):
        s = small_schema(rng)
        v = fair_solve(s, budget=400)
        b = enumerate_baseline(s, 6)
        if isinstance(v, Unsat):
            assert isinstance(b, UnsatUpTo)
            assert loop_certificate_violations(v.tableau) == []
        elif isinstance(v, Sat):
            assert evaluate_prop(realize(s, v.env), v.model)
        assert local_soundness_violations(v.tableau, max_param=6) == []


def test_time_limit():
    v = Prover(corpus("nested"), Options(time_limit=0.0)).run()
    assert isinstance(v, Unknown) and v.reason == "timeout"
