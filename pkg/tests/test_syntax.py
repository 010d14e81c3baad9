import random

import pytest

from schemata import linarith as la
from schemata.cli import corpus_names, corpus_text
from schemata.generate import small_schema
from schemata.ground import solve_prop
from schemata.schema import Schema, check_wellformed, is_nnf, realize
from schemata.syntax import ParseError, format_schema, parse_constraint, parse_expr, parse_pattern, parse_problem

from conftest import ground_occurrences


def same_realizations(a: Schema, b: Schema, top: int = 5) -> bool:
    for v in range(top + 1):
        env = {a.parameters[0]: v}
        fa, fb = realize(a, env), realize(b, env)
        if (solve_prop(fa) is None) != (solve_prop(fb) is None):
            return False
        if ground_occurrences(a.pattern, env) != ground_occurrences(b.pattern, env):
            return False
    return True


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_round_trip(name):
    s = parse_problem(corpus_text(name))
    assert check_wellformed(s) == []
    text = format_schema(s)
    t = parse_problem(text)
    assert format_schema(t) == text
    assert t.parameters == s.parameters


def test_fuzzed_round_trip():
    rng = random.Random(5)
    for _ in range(100):
        s = small_schema(rng)
        t = parse_problem(format_schema(s))
        assert format_schema(t) == format_schema(parse_problem(format_schema(t)))
        assert same_realizations(s, t)


def test_expressions_and_constraints():
    assert parse_expr("2*n - (n - 3)") == la.var("n") + 3
    c = parse_constraint("n >= 1 /\\ ~(n = 4) \\/ 3 | n + 1")
    for v in range(8):
        assert la.evaluate(c, {"n": v}) == ((v >= 1 and v != 4) or (v + 1) % 3 == 0)


def test_connectives_desugar_to_nnf():
    p = parse_pattern("~(p[1] -> (q[1] <-> (r xor p[2])))")
    assert is_nnf(p)


def test_body_binds_tighter_than_connectives():
    p = parse_pattern("And i in [1..n]: p[i] /\\ q[1]")
    q = parse_pattern("(And i in [1..n]: p[i]) /\\ q[1]")
    assert p == q


@pytest.mark.parametrize("text", [
    "schema s { params: n; constraint: n >= 0; pattern: p[1] /\\ }",
    "schema s { params: n; constraint: n >= ; pattern: p[1] }",
    "schema s { params: n; constraint: n >= 0; pattern: And i in [1..n] p[i] }",
    "schema s { params: n; constraint: n * n >= 0; pattern: p[1] }",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_problem(text)


def test_unbounded_domain_is_ill_formed():
    s = parse_problem("schema s { params: n; constraint: n >= 0; pattern: And i in {i >= 1}: p[i] }")
    assert any("enclose" in e or "bound" in e for e in check_wellformed(s))


def test_repeated_binders_are_renamed():
    s = parse_problem("schema s { params: n; constraint: n >= 0; pattern: (Or i in [1..n]: p[i]) <-> (And i in [1..n]: q[i]) }")
    assert check_wellformed(s) == []
