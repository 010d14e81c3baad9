"""Loop detection: equality up to a parameter shift, refined by purification."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from . import linarith as la
from .linarith import Constraint, LinearExpr
from .rules import algebraic, lit_key, pctx
from .schema import (
    BOTTOM,
    TOP,
    Conj,
    Disj,
    Iter,
    Lit,
    Pattern,
    Schema,
    alpha_key,
    map_pattern_exprs,
    may_belong,
    mk_and,
    mk_op,
    occurrences,
    replace_atom,
    subst_pattern,
    unify_matrix,
    walk,
)

NOT_ARITHMETIC = "not-arithmetic"


@dataclass(frozen=True)
class Normal:
    """Canonical form of a node schema used for shift comparison."""

    conjuncts: Tuple[Pattern, ...]
    constraint: FrozenSet[Constraint]
    params: Tuple[str, ...]

    def pattern(self) -> Pattern:
        return mk_and(*self.conjuncts)


@dataclass(frozen=True)
class LoopCertificate:
    bud: int
    companion: int
    shift: int
    parameter: str

    def as_dict(self) -> Dict[str, object]:
        return {"bud": self.bud, "companion": self.companion, "shift": self.shift, "parameter": self.parameter}


# ---------------------------------------------------------------------------
# Purity


def is_pure(L: Lit, s: Schema) -> bool:
    """L is pure in s when its complement never occurs in a realization."""
    return not may_belong(L.complement(), s)


@lru_cache(maxsize=1 << 15)
def _may_clash(occ: Lit, enc, other: Lit, enc2, C: Constraint) -> bool:
    """Can an instance of ``other`` (under ``enc2``) coincide with one of ``occ``?"""
    ctx = pctx(C, enc)
    avoid = {x for x, _ in enc} | occ.variables() | la.free_vars(ctx)
    # binders are kept apart from the context, so the existential can stay implicit
    phi = unify_matrix(occ.indices, enc2, other.indices, avoid)
    return la.is_satisfiable(la.conj(ctx, phi))


def pure_literals(pattern: Pattern, C: Constraint) -> List[Lit]:
    """Literals none of whose occurrences can meet an occurrence of the complement."""
    groups: Dict[Tuple[str, int, bool], List] = {}
    occs = occurrences(pattern)
    for _, occ, enc in occs:
        groups.setdefault((occ.symbol, len(occ.indices), occ.positive), []).append((occ, enc))
    verdict: Dict[Lit, bool] = {}
    for _, occ, enc in sorted(occs, key=lambda t: (lit_key(t[1]), t[0])):
        if verdict.get(occ) is False:
            continue
        opposite = groups.get((occ.symbol, len(occ.indices), not occ.positive), ())
        ok = not any(_may_clash(occ, enc, other, enc2, C) for other, enc2 in opposite)
        verdict[occ] = verdict.get(occ, True) and ok
    return [L for L, ok in verdict.items() if ok]


def purify(pattern: Pattern, C: Constraint, limit: int = 1000) -> Pattern:
    """Replace pure literal occurrences by ``true`` until none is left."""
    for _ in range(limit):
        pattern = algebraic(pattern, C)
        pure = pure_literals(pattern, C)
        if not pure:
            return pattern
        for L in pure:
            pattern = replace_atom(pattern, L.symbol, L.indices, TOP if L.positive else BOTTOM)
    return pattern


def remove_redundant_constraints(C: Constraint) -> Constraint:
    """Drop conjuncts implied by the remaining ones, in order; ``false`` if unsatisfiable."""
    if not la.is_satisfiable(C):
        return la.FALSE
    parts = list(la.conjuncts(C))
    i = 0
    while i < len(parts):
        rest = parts[:i] + parts[i + 1:]
        if la.entails(la.conj(*rest), parts[i]):
            parts = rest
        else:
            i += 1
    return la.conj(*parts)


# ---------------------------------------------------------------------------
# Shift machinery


def _param_offsets_erased(e: LinearExpr, params: Set[str]) -> LinearExpr:
    if e.variables & params:
        return LinearExpr(0, e.coeffs)
    return e


def _erase(p: Pattern, params: Set[str]) -> Pattern:
    return map_pattern_exprs(p, lambda e: _param_offsets_erased(e, params))


def _offsets(p: Pattern, params: Set[str]) -> Tuple[int, ...]:
    out: List[int] = []

    def grab(e: LinearExpr) -> LinearExpr:
        if e.variables & params:
            out.append(e.constant)
        return e

    map_pattern_exprs(p, grab)
    return tuple(out)


def _conj_key(p: Pattern, params) -> Tuple[str, Tuple[int, ...]]:
    return _conj_key_cached(p, frozenset(params))


@lru_cache(maxsize=1 << 14)
def _conj_key_cached(p: Pattern, params: FrozenSet[str]) -> Tuple[bytes, Tuple[int, ...]]:
    # a digest keeps the key small; equality of conjuncts is still checked in full
    shape = hashlib.blake2b(repr(_erase(p, params)).encode(), digest_size=16).digest()
    return (shape, _offsets(p, params))


def collapse_singletons(p: Pattern) -> Pattern:
    """Replace iterations over a one-point frame ``[e..e]`` by their only instance."""
    if isinstance(p, (Conj, Disj)):
        kids = [collapse_singletons(a) for a in p.args]
        return mk_op("and" if isinstance(p, Conj) else "or", *kids)
    if not isinstance(p, Iter):
        return p
    body = collapse_singletons(p.body)
    fb = la.frame_bounds(p.domain, p.var)
    if fb is not None and fb[0] == fb[1]:
        try:
            return subst_pattern(body, {p.var: fb[0]})
        except la.CaptureError:
            pass
    return p if body is p.body else Iter(p.kind, p.var, p.domain, body)


def normalize(pattern: Pattern, C: Constraint, params: Sequence[str], pure: bool = True) -> Normal:
    """Purify, drop redundant constraints, alpha-rename and sort top-level conjuncts."""
    C = remove_redundant_constraints(C)
    pattern = collapse_singletons(pattern)
    if pure:
        pattern = purify(pattern, C)
    kids = pattern.args if isinstance(pattern, Conj) else (pattern,)
    ps = set(params)
    # binders are canonical per conjunct; names may repeat across conjuncts
    kids = tuple(sorted((alpha_key(k) for k in kids), key=lambda k: _conj_key(k, ps)))
    return Normal(kids, frozenset(la.conjuncts(C)), tuple(params))


@lru_cache(maxsize=1 << 14)
def signature(n: Normal, param: str) -> Tuple:
    """Shift-invariant key: parameter offsets erased."""
    ps = {param}
    kids = tuple(_conj_key(k, ps)[0] for k in n.conjuncts)
    cons = frozenset(repr(la.map_exprs(c, lambda e: _param_offsets_erased(e, ps))) for c in n.constraint)
    return (kids, cons)


def shift_normal(n: Normal, param: str, k: int) -> Normal:
    """Substitute ``param - k`` for ``param``."""
    sub = {param: la.var(param) - k}
    kids = tuple(k_.subst(sub) for k_ in n.conjuncts)
    cons = frozenset(la.apply_subst(c, sub) for c in n.constraint)
    return Normal(kids, cons, n.params)


def _shift_candidates(a: Normal, b: Normal, param: str) -> List[int]:
    def collect(n: Normal) -> Set[Tuple[int, int]]:
        out: Set[Tuple[int, int]] = set()

        def grab(e: LinearExpr) -> LinearExpr:
            c = e.coeff(param)
            if c:
                out.add((c, e.constant))
            return e

        for k in n.conjuncts:
            map_pattern_exprs(k, grab)
        for c in n.constraint:
            la.map_exprs(c, grab)
        return out

    ca, cb = collect(a), collect(b)
    ks: Set[int] = set()
    for q, x in ca:
        for q2, y in cb:
            # b's (q*param + y) becomes q*param - q*k + y, which should equal x
            if q == q2 and (y - x) % q == 0 and (y - x) // q > 0:
                ks.add((y - x) // q)
    return sorted(ks)


def eq_up_to_shift(a: Normal, b: Normal, param: Optional[str] = None) -> Optional[Tuple[str, int]]:
    """Least k > 0 with ``a == b[param - k / param]``."""
    params = [param] if param else list(a.params)
    for p in params:
        if signature(a, p) != signature(b, p):
            continue
        for k in _shift_candidates(a, b, p):
            if _equal(a, shift_normal(b, p, k)):
                return p, k
    return None


def _equal(a: Normal, b: Normal) -> bool:
    return a.conjuncts == tuple(sorted(b.conjuncts, key=lambda k: _conj_key(k, set(a.params)))) and a.constraint == b.constraint


def loops_on(bud: Normal, companion: Normal) -> Optional[Tuple[str, int]]:
    return eq_up_to_shift(bud, companion)


# ---------------------------------------------------------------------------
# Deviation and arithmetic shape


def side_exprs(c: Constraint) -> List[LinearExpr]:
    """Both sides of each atom, as a reader would write them."""
    out: List[LinearExpr] = []
    if isinstance(c, (la.Le, la.Eq)):
        out.extend(la.sides(c.expr))
    elif isinstance(c, la.Div):
        out.append(c.expr)
    elif isinstance(c, la.Not):
        out.extend(side_exprs(c.arg))
    elif isinstance(c, (la.And, la.Or)):
        for a in c.args:
            out.extend(side_exprs(a))
    elif isinstance(c, (la.Exists, la.Forall)):
        out.extend(side_exprs(c.body))
    return out


def exprs_of(x: Union[Pattern, Constraint, Schema]) -> List[LinearExpr]:
    if isinstance(x, Schema):
        return exprs_of(x.pattern) + exprs_of(x.constraint)
    if isinstance(x, la.Constraint):
        return side_exprs(x)
    out: List[LinearExpr] = []
    for _, node, _ in walk(x):
        if isinstance(node, Lit):
            out.extend(node.indices)
        elif isinstance(node, Iter):
            out.extend(side_exprs(node.domain))
    return out


def deviation(x, v: str) -> Union[int, str]:
    """Spread of the offsets k over expressions ``v + k``; NOT_ARITHMETIC otherwise."""
    ks: List[int] = []
    for e in exprs_of(x):
        if v not in e.variables:
            continue
        if e.coeffs != ((v, 1),):
            return NOT_ARITHMETIC
        ks.append(e.constant)
    if not ks:
        return 0
    return max(ks) - min(ks)
