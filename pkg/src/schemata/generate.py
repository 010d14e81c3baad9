"""Random schemata for fuzzing and termination experiments."""
from __future__ import annotations

import random
from typing import List, Optional

from . import linarith as la
from .schema import Iter, Lit, Pattern, Schema, mk_and, mk_or


def regularly_nested(rng: random.Random, symbols: int = 3, depth: int = 2, k: int = 1,
                     l: Optional[int] = None, param: str = "n", conjuncts: int = 3) -> Schema:
    """Monadic, aligned on [k..param - l], indices ``x + c`` with small c."""
    if l is None:
        l = rng.randint(0, 2)
    names = ["p", "q", "r"][:symbols]
    n = la.var(param)
    frame_hi = n - l
    counter = [0]

    def index(scope: List[str]) -> la.LinearExpr:
        base = rng.choice(scope + [param])
        return la.var(base) + rng.choice((-1, 0, 0, 1))

    def literal(scope: List[str]) -> Pattern:
        return Lit(rng.choice(names), (index(scope),), rng.random() < 0.5)

    def pat(scope: List[str], d: int) -> Pattern:
        r = rng.random()
        if d > 0 and r < 0.45:
            x = f"i{counter[0]}"
            counter[0] += 1
            kind = rng.choice(("and", "or"))
            body = pat(scope + [x], d - 1)
            return Iter(kind, x, la.frame(x, k, frame_hi), body)
        if r < 0.75:
            return literal(scope)
        parts = [pat(scope, d - 1 if d > 0 else 0) for _ in range(2)]
        return mk_and(*parts) if rng.random() < 0.5 else mk_or(*parts)

    parts = [pat([], depth) for _ in range(rng.randint(2, conjuncts))]
    # at least one iteration so that the frame is present
    if not any(isinstance(c, Iter) for c in parts):
        x = f"i{counter[0]}"
        parts.append(Iter(rng.choice(("and", "or")), x, la.frame(x, k, frame_hi), literal([x])))
    return Schema(mk_and(*parts), la.ge(n, 0), (param,))


def small_schema(rng: random.Random, param: str = "n") -> Schema:
    """Any small well-formed single-parameter schema, framed or not."""
    n = la.var(param)
    counter = [0]

    def expr(scope: List[str]) -> la.LinearExpr:
        base = rng.choice(scope + [param])
        return la.var(base) + rng.randint(-1, 2)

    def domain(x: str, scope: List[str]) -> la.Constraint:
        lo = rng.choice((la.const(1), la.const(0), la.const(2)))
        hi = rng.choice([n, n - 1, n + 1] + [la.var(y) for y in scope])
        dom = la.frame(x, lo, hi)
        if scope and rng.random() < 0.3:
            dom = la.conj(dom, la.ne(x, la.var(rng.choice(scope))))
        return dom

    def pat(scope: List[str], d: int) -> Pattern:
        r = rng.random()
        if d > 0 and r < 0.4:
            x = f"j{counter[0]}"
            counter[0] += 1
            return Iter(rng.choice(("and", "or")), x, domain(x, scope), pat(scope + [x], d - 1))
        if r < 0.8:
            return Lit(rng.choice("pq"), (expr(scope),), rng.random() < 0.5)
        a, b = pat(scope, max(d - 1, 0)), pat(scope, max(d - 1, 0))
        return mk_and(a, b) if rng.random() < 0.5 else mk_or(a, b)

    return Schema(mk_and(pat([], 2), pat([], 2)), la.ge(n, rng.randint(0, 1)), (param,))
