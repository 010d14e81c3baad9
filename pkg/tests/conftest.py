"""Brute-force oracles shared by the test modules.

Nothing here calls the decision procedures under test: constraints are
evaluated by enumeration and schemata are expanded by a separate walker.
"""
from __future__ import annotations

import itertools
import random
from typing import Dict, Iterator, Set, Tuple

import pytest

from schemata import linarith as la
from schemata.schema import Bottom, Conj, Disj, Iter, Lit, Pattern, Schema, Top

# every bound or index expression built by the fuzzers stays inside this window
WINDOW = range(-24, 25)


def holds(c: la.Constraint, env: Dict[str, int]) -> bool:
    """Truth of ``c`` with quantifiers ranging over WINDOW."""
    if isinstance(c, la.Truth):
        return c.value
    if isinstance(c, (la.Le, la.Eq, la.Div)):
        v = c.expr.constant + sum(k * env[x] for x, k in c.expr.coeffs)
        if isinstance(c, la.Le):
            return v <= 0
        if isinstance(c, la.Eq):
            return v == 0
        return v % c.modulus == 0
    if isinstance(c, la.Not):
        return not holds(c.arg, env)
    if isinstance(c, la.And):
        return all(holds(a, env) for a in c.args)
    if isinstance(c, la.Or):
        return any(holds(a, env) for a in c.args)
    if isinstance(c, (la.Exists, la.Forall)):
        test = any if isinstance(c, la.Exists) else all
        return test(holds(c.body, {**env, c.var: v}) for v in WINDOW)
    raise TypeError(c)


def assignments(names, lo: int = -4, hi: int = 4) -> Iterator[Dict[str, int]]:
    names = sorted(names)
    for vals in itertools.product(range(lo, hi + 1), repeat=len(names)):
        yield dict(zip(names, vals))


def _ev(e: la.LinearExpr, env: Dict[str, int]) -> int:
    return e.constant + sum(k * env[x] for x, k in e.coeffs)


def ground_occurrences(p: Pattern, env: Dict[str, int]) -> Set[Tuple[str, Tuple[int, ...], bool]]:
    """Signed ground atoms of the unsimplified expansion of ``p``."""
    if isinstance(p, (Top, Bottom)):
        return set()
    if isinstance(p, Lit):
        return {(p.symbol, tuple(_ev(e, env) for e in p.indices), p.positive)}
    if isinstance(p, (Conj, Disj)):
        return set().union(*(ground_occurrences(a, env) for a in p.args))
    if isinstance(p, Iter):
        out: Set = set()
        for v in WINDOW:
            inner = {**env, p.var: v}
            if holds(p.domain, inner):
                out |= ground_occurrences(p.body, inner)
        return out
    raise TypeError(p)


def ground_lit(L: Lit, env: Dict[str, int]) -> Tuple[str, Tuple[int, ...], bool]:
    return (L.symbol, tuple(_ev(e, env) for e in L.indices), L.positive)


def random_constraint(rng: random.Random, free, depth: int = 2, bound=()) -> la.Constraint:
    """Small Presburger formula; quantifiers are bounded so WINDOW is exact."""
    scope = list(free) + list(bound)

    def expr():
        e = la.const(rng.randint(-3, 3))
        for x in rng.sample(scope, min(len(scope), rng.randint(1, 2))):
            e = e + la.var(x) * rng.choice((-2, -1, 1, 1, 2))
        return e

    r = rng.random()
    if depth == 0 or r < 0.3:
        kind = rng.choice(("le", "eq", "ne", "div"))
        if kind == "div":
            return la.divides(rng.choice((2, 3)), expr())
        a, b = expr(), la.const(rng.randint(-3, 3))
        return {"le": la.le, "eq": la.eq, "ne": la.ne}[kind](a, b)
    if r < 0.5:
        x = f"q{depth}{rng.randint(0, 99)}"
        lo = la.const(rng.randint(-4, 0))
        hi = la.var(rng.choice(list(free))) + rng.randint(0, 3) if free else la.const(rng.randint(0, 4))
        dom = la.frame(x, lo, hi)
        body = random_constraint(rng, free, depth - 1, tuple(bound) + (x,))
        if rng.random() < 0.5:
            return la.exists(x, la.conj(dom, body))
        return la.forall(x, la.implies(dom, body))
    if r < 0.65:
        return la.neg(random_constraint(rng, free, depth - 1, bound))
    parts = [random_constraint(rng, free, depth - 1, bound) for _ in range(2)]
    return la.conj(*parts) if rng.random() < 0.5 else la.disj(*parts)


@pytest.fixture
def rng():
    return random.Random(1234)


def qe_violations(cases: int, seed: int = 7):
    """Fuzzed constraints whose eliminated form disagrees somewhere on [-4..4]^vars."""
    rng = random.Random(seed)
    bad = []
    for _ in range(cases):
        free = rng.sample(["a", "b", "c"], rng.randint(1, 2))
        c = random_constraint(rng, free, depth=3)
        q = la.eliminate_quantifiers(c)
        if not la.is_quantifier_free(q):
            bad.append((c, q, None))
            continue
        for env in assignments(la.free_vars(c) | la.free_vars(q)):
            if holds(c, env) != la.evaluate(q, env):
                bad.append((c, q, env))
                break
    return bad


def occurrence_violations(cases: int, seed: int = 11, max_param: int = 6):
    """Fuzzed (literal, schema) pairs where an occurrence decision is refuted."""
    from schemata.generate import small_schema
    from schemata.schema import always_occurs_counterexample, may_belong_witness

    rng = random.Random(seed)
    bad = []
    for i in range(cases):
        s = small_schema(rng)
        (p,) = s.parameters
        idx = la.var(p) + rng.randint(-1, 2) if rng.random() < 0.6 else la.const(rng.randint(0, 3))
        L = Lit(rng.choice("pq"), (idx,), rng.random() < 0.5)
        envs = [{p: v} for v in range(max_param + 1) if holds(s.constraint, {p: v})]
        occurs = [ground_lit(L, e) in ground_occurrences(s.pattern, e) for e in envs]

        cex = always_occurs_counterexample(L, s)
        if cex is None:
            if not all(occurs):
                bad.append((i, "always", L, s))
        else:
            e = {p: cex[p]}
            if not holds(s.constraint, e) or ground_lit(L, e) in ground_occurrences(s.pattern, e):
                bad.append((i, "counterexample", L, s, cex))

        wit = may_belong_witness(L, s)
        if wit is None:
            if any(occurs):
                bad.append((i, "never", L, s))
        else:
            e = {p: wit[p]}
            if not holds(s.constraint, e) or ground_lit(L, e) not in ground_occurrences(s.pattern, e):
                bad.append((i, "witness", L, s, wit))
    return bad
