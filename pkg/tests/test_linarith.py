import random

import pytest
from hypothesis import given, settings, strategies as st

from schemata import linarith as la
from conftest import assignments, holds, qe_violations, random_constraint

n, x, y = la.var("n"), la.var("x"), la.var("y")


def test_qe_fuzz():
    assert qe_violations(60) == []


def test_expr_arithmetic():
    e = (x * 2 + 3) - (x + y)
    assert e.coeff("x") == 1 and e.coeff("y") == -1 and e.constant == 3
    assert (e * 0).is_ground()
    assert e.subst({"x": y}).coeff("y") == 0


def test_atoms_normalise():
    assert la.le(1, 2) == la.TRUE
    assert la.eq(x * 2, 3) == la.FALSE
    assert la.divides(1, x) == la.TRUE
    assert la.conj(la.TRUE, la.FALSE) == la.FALSE
    assert la.disj() == la.FALSE and la.conj() == la.TRUE


def test_entailment_and_models():
    C = la.conj(la.ge(n, 2), la.le(n, 5))
    assert la.entails(C, la.ge(n, 1))
    assert not la.entails(C, la.ge(n, 3))
    w = la.satisfying_assignment(la.conj(C, la.divides(2, n + 1)))
    assert w is not None and w["n"] in (3, 5)
    assert not la.is_satisfiable(la.conj(C, la.eq(n, 7)))


def test_integer_gap_is_unsat():
    # 2x = 2y + 1 has rational but no integer solutions
    assert not la.is_satisfiable(la.eq(x * 2, y * 2 + 1))


def test_unit_equality_elimination():
    c = la.exists("x", la.conj(la.eq(x, n + 1), la.le(x, 4)))
    assert la.equivalent(la.eliminate_quantifiers(c), la.le(n, 3))


def test_enclosure_and_frames():
    dom = la.conj(la.ge(x, 1), la.le(x, n))
    assert la.encloses(dom, "x")
    assert not la.encloses(la.ge(x, 1), "x")
    lo, hi = la.frame_bounds(dom, "x")
    assert lo == la.const(1) and hi == n
    assert la.solution_range(la.conj(dom, la.ne(x, 2)), "x", {"n": 4}) == [1, 3, 4]


def test_evaluate_requires_all_variables():
    with pytest.raises(la.UnboundVariable):
        la.evaluate(la.le(x, n), {"x": 1})


def test_capture_is_rejected():
    c = la.exists("x", la.le(x, y))
    with pytest.raises(la.CaptureError):
        la.apply_subst(c, {"y": x})


@settings(max_examples=60, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 3), st.integers(-5, 5))
def test_projection_matches_enumeration(a, b, m, k):
    # exists x. a <= x <= b + y /\ m | x + k
    body = la.conj(la.frame("x", a, y + b), la.divides(m, x + k))
    q = la.eliminate_quantifiers(la.exists("x", body))
    for yv in range(-4, 5):
        expect = any(a <= v <= yv + b and (v + k) % m == 0 for v in range(-10, 11))
        assert la.evaluate(q, {"y": yv}) == expect


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_sat_agrees_with_search(seed):
    rng = random.Random(seed)
    c = random_constraint(rng, ["a", "b"], depth=2)
    found = any(holds(c, env) for env in assignments(la.free_vars(c), -6, 6))
    w = la.satisfying_assignment(c)
    if w is not None:
        env = {v: w.get(v, 0) for v in la.free_vars(c)}
        # quantifier bounds follow the free variables, so stay inside the oracle window
        if all(abs(v) <= 20 for v in env.values()):
            assert holds(c, env)
    if found:
        assert w is not None
