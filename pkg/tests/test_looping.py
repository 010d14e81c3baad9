import random

from hypothesis import given, settings, strategies as st

from schemata import linarith as la
from schemata.cli import corpus_text
from schemata.generate import regularly_nested
from schemata.looping import (
    NOT_ARITHMETIC, deviation, eq_up_to_shift, is_pure, loops_on, normalize, purify, remove_redundant_constraints,
    shift_normal,
)
from schemata.schema import Schema, TOP, big_and, lit, mk_and, mk_or, subst_pattern
from schemata.syntax import parse_problem

n, i = la.var("n"), la.var("i")


def norm(s: Schema):
    return normalize(s.pattern, s.constraint, s.parameters)


def test_shifted_chain_loops_on_chain():
    chain = parse_problem(corpus_text("example2"))
    shifted = parse_problem(corpus_text("chain_shifted"))
    assert loops_on(norm(shifted), norm(chain)) == ("n", 1)
    assert loops_on(norm(chain), norm(chain)) is None


def test_shift_by_two():
    s = parse_problem(corpus_text("example2"))
    t = Schema(subst_pattern(s.pattern, {"n": n + 2}), la.ge(n + 2, 0), ("n",))
    # t at n is s at n + 2, so s loops on t with k = 2
    assert eq_up_to_shift(norm(s), norm(t)) == ("n", 2)


def test_pure_literal_removed():
    p = mk_and(lit("p", n), mk_or(lit("q", 1), lit("q", 2, positive=False)), lit("q", 2))
    s = Schema(p, la.ge(n, 0), ("n",))
    assert is_pure(lit("p", n), s)
    assert not is_pure(lit("q", 2), s)
    out = purify(p, s.constraint)
    assert lit("p", n) not in getattr(out, "args", (out,))


def test_purify_everything():
    p = big_and("i", la.frame("i", 1, n), lit("p", i))
    assert purify(p, la.ge(n, 0)) == TOP


def test_redundant_constraints():
    C = la.conj(la.ge(n, 0), la.ge(n, 2), la.le(n, 9))
    assert la.equivalent(remove_redundant_constraints(C), C)
    assert len(la.conjuncts(remove_redundant_constraints(C))) == 2


def test_deviation():
    s = parse_problem(corpus_text("example2"))
    assert deviation(s, "n") == 1
    assert deviation(s, "i") == 1
    s2 = Schema(big_and("i", la.frame("i", 1, n), lit("p", i * 2)), la.ge(n, 0), ("n",))
    assert deviation(s2, "i") == NOT_ARITHMETIC


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_shift_is_recovered(seed, k):
    s = regularly_nested(random.Random(seed))
    a = norm(s)
    b = shift_normal(a, "n", -k)  # b at n is a at n + k
    r = eq_up_to_shift(a, b, "n")
    assert r == ("n", k)
