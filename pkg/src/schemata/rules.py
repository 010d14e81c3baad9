"""Tableau rules on node states (pattern, constraint, literal set)."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import linarith as la
from .linarith import Constraint, LinearExpr
from .schema import (
    BOTTOM,
    TOP,
    Bottom,
    Conj,
    Disj,
    Enclosing,
    Iter,
    Lit,
    Pattern,
    Position,
    Schema,
    Top,
    all_vars,
    alpha_key,
    always_occurs,
    fresh_name,
    get_at,
    mk_and,
    mk_op,
    mk_or,
    occurrences,
    pattern_free_vars,
    rename_binders,
    replace_at,
    subst_pattern,
    walk,
)


def lit_key(L: Lit) -> tuple:
    return (L.symbol, tuple(str(e) for e in L.indices), not L.positive)


@dataclass(frozen=True)
class State:
    """A tableau node label: pattern, constraint and the literal set."""

    pattern: Pattern
    constraint: Constraint
    lits: Tuple[Lit, ...] = ()
    params: Tuple[str, ...] = ()

    def schema(self) -> Schema:
        return Schema(mk_and(self.pattern, *self.lits), self.constraint, self.params)

    def is_closed(self) -> bool:
        return self.pattern == BOTTOM or not la.is_satisfiable(self.constraint)

    def with_lit(self, L: Lit) -> "State":
        return State(self.pattern, self.constraint, tuple(sorted(self.lits + (L,), key=lit_key)), self.params)

    def used_names(self) -> Set[str]:
        s = all_vars(self.pattern) | set(self.params)
        for L in self.lits:
            s |= L.variables()
        return s


@dataclass
class Application:
    """One rule application: the rule name, where, and the resulting states."""

    rule: str
    children: List[State]
    positions: List[Position] = field(default_factory=list)
    info: Dict[str, object] = field(default_factory=dict)


@lru_cache(maxsize=1 << 14)
def pctx(C: Constraint, enc: Enclosing) -> Constraint:
    return la.conj(C, *(d for _, d in enc))


def _nonempty_everywhere(ctx: Constraint, x: str, dom: Constraint) -> bool:
    return not la.is_satisfiable(la.conj(ctx, la.forall(x, la.neg(dom))))


def simplify_constraint(C: Constraint) -> Constraint:
    """Drop conjuncts entailed by the others (``false`` if unsatisfiable)."""
    parts = list(la.conjuncts(C))
    if not la.is_satisfiable(C):
        return la.FALSE
    i = 0
    while i < len(parts):
        rest = parts[:i] + parts[i + 1:]
        if la.entails(la.conj(*rest), parts[i]):
            parts = rest
        else:
            i += 1
    return la.conj(*parts)


def add_constraint(C: Constraint, extra: Constraint) -> Constraint:
    if not la.is_quantifier_free(extra):
        extra = la.eliminate_quantifiers(extra)
    return simplify_constraint(la.conj(C, extra))


# ---------------------------------------------------------------------------
# Algebraic simplification


@lru_cache(maxsize=1 << 15)
def _alg(p: Pattern, ctx: Constraint) -> Pattern:
    if isinstance(p, (Lit, Top, Bottom)):
        return p
    if isinstance(p, (Conj, Disj)):
        is_and = isinstance(p, Conj)
        absorbing, unit = (BOTTOM, TOP) if is_and else (TOP, BOTTOM)
        kids: List[Pattern] = []
        seen: Set[Pattern] = set()
        for a in p.args:
            b = _alg(a, ctx)
            if b == absorbing:
                return absorbing
            if b == unit:
                continue
            for c in (b.args if isinstance(b, type(p)) else (b,)):
                k = alpha_key(c)
                if k not in seen:
                    seen.add(k)
                    kids.append(c)
        if not kids:
            return unit
        if len(kids) == 1:
            return kids[0]
        return type(p)(tuple(kids))
    if isinstance(p, Iter):
        if not la.is_satisfiable(la.conj(ctx, p.domain)):
            return p.neutral
        body = _alg(p.body, la.conj(ctx, p.domain))
        if body == p.neutral:
            return body
        if p.var not in pattern_free_vars(body) and _nonempty_everywhere(ctx, p.var, p.domain):
            return body
        if body is p.body:
            return p
        return Iter(p.kind, p.var, p.domain, body)
    raise TypeError(p)


def algebraic(p: Pattern, C: Constraint) -> Pattern:
    """Fixpoint of the algebraic rewrites under positional contexts."""
    while True:
        q = _alg(p, C)
        if q == p:
            return q
        p = q


def rule_algebraic(st: State) -> Optional[Application]:
    new = algebraic(st.pattern, st.constraint)
    if new == st.pattern:
        return None
    return Application("algebraic", [State(new, st.constraint, st.lits, st.params)])


# ---------------------------------------------------------------------------
# Domains


def _bound_terms(dom: Constraint, x: str):
    lows: List[LinearExpr] = []
    highs: List[LinearExpr] = []
    for a in la.conjuncts(dom):
        if isinstance(a, la.Le):
            k = a.expr.coeff(x)
            if k == -1:
                lows.append(a.expr + la.var(x))
            elif k == 1:
                highs.append(-(a.expr - la.var(x)))
        elif isinstance(a, la.Eq) and abs(a.expr.coeff(x)) == 1:
            k = a.expr.coeff(x)
            t = -(a.expr - la.var(x) * k) * k
            lows.append(t)
            highs.append(t)
        elif isinstance(a, la.Not) and isinstance(a.arg, la.Eq) and abs(a.arg.expr.coeff(x)) == 1:
            k = a.arg.expr.coeff(x)
            t = -(a.arg.expr - la.var(x) * k) * k
            lows.append(t + 1)
            highs.append(t - 1)
    lows = [e for e in dict.fromkeys(lows) if x not in e.variables]
    highs = [e for e in dict.fromkeys(highs) if x not in e.variables]
    return lows, highs


def tidy_domain(dom: Constraint, x: str, ctx: Constraint) -> Constraint:
    """Replace ``dom`` by an equivalent frame ``[a..b]`` under ``ctx`` when one exists."""
    if not la.is_quantifier_free(dom):
        dom = la.eliminate_quantifiers(dom)
    dom = simplify_domain(dom)
    if la.frame_bounds(dom, x) is not None:
        return dom
    lows, highs = _bound_terms(dom, x)
    for lo in lows:
        for hi in highs:
            fr = la.frame(x, lo, hi)
            if fr == dom:
                return fr
            diff = la.disj(la.conj(dom, la.neg(fr)), la.conj(fr, la.neg(dom)))
            if not la.is_satisfiable(la.conj(ctx, diff)):
                return fr
    return dom


def simplify_domain(dom: Constraint) -> Constraint:
    if isinstance(dom, la.And):
        return simplify_constraint(dom) if la.is_satisfiable(dom) else dom
    return dom


# ---------------------------------------------------------------------------
# propsimpl


def _wrap(occ: Lit, lam: Lit, used: Set[str]) -> Pattern:
    w = fresh_name("w", used)
    differ = la.disj(*(la.ne(a, b) for a, b in zip(occ.indices, lam.indices)))
    dom = la.conj(differ, la.eq(w, 0))
    kind = "and" if occ.positive == lam.positive else "or"
    return Iter(kind, w, dom, occ)


@lru_cache(maxsize=1 << 15)
def _may_coincide(occ: Lit, enc: Enclosing, lam: Lit, C: Constraint) -> bool:
    eqs = la.conj(*(la.eq(a, b) for a, b in zip(occ.indices, lam.indices)))
    return la.is_satisfiable(la.conj(pctx(C, enc), eqs))


def rule_propsimpl(st: State, param_only: bool = False, limit: int = 500) -> Optional[Application]:
    """Wrap occurrences that may coincide with a literal of the set."""
    if not st.lits:
        return None
    params = set(st.params)
    pattern = st.pattern
    used = st.used_names()
    done: List[Position] = []
    applied: List[str] = []
    for _ in range(limit):
        hit = None
        for pos, occ, enc in occurrences(pattern):
            if param_only and not occ.variables() <= params:
                continue
            for lam in st.lits:
                if lam.symbol != occ.symbol or len(lam.indices) != len(occ.indices):
                    continue
                if _may_coincide(occ, enc, lam, st.constraint):
                    hit = (pos, occ, lam)
                    break
            if hit:
                break
        if hit is None:
            break
        pos, occ, lam = hit
        pattern = replace_at(pattern, pos, _wrap(occ, lam, used))
        done.append(pos)
        applied.append(str(lam))
    if not done:
        return None
    return Application("propsimpl", [State(pattern, st.constraint, st.lits, st.params)], done, {"lits": applied})


# ---------------------------------------------------------------------------
# propsplit


def propsplit_candidates(st: State) -> List[Lit]:
    params = set(st.params)
    seen: Dict[tuple, Lit] = {}
    for _, occ, _ in occurrences(st.pattern):
        if occ.variables() <= params:
            L = Lit(occ.symbol, occ.indices, True)
            seen.setdefault(lit_key(L), L)
    return [seen[k] for k in sorted(seen)]


def _lambda_may_contain(st: State, L: Lit) -> bool:
    for lam in st.lits:
        if lam.symbol != L.symbol or len(lam.indices) != len(L.indices):
            continue
        eqs = la.conj(*(la.eq(a, b) for a, b in zip(L.indices, lam.indices)))
        if la.is_satisfiable(la.conj(st.constraint, eqs)):
            return True
    return False


def rule_propsplit(st: State) -> Optional[Application]:
    s = Schema(st.pattern, st.constraint, st.params)
    for L in propsplit_candidates(st):
        if _lambda_may_contain(st, L):
            continue
        if always_occurs(L, s) or always_occurs(L.complement(), s):
            return Application("propsplit", [st.with_lit(L), st.with_lit(L.complement())], info={"lit": str(L)})
    return None


# ---------------------------------------------------------------------------
# constraintsplit


def is_framed(it: Iter) -> bool:
    return la.frame_bounds(it.domain, it.var) is not None


def rule_constraintsplit(st: State, framed: Optional[bool] = None) -> Optional[Application]:
    params = set(st.params)
    for pos, node, _ in walk(st.pattern):
        if not isinstance(node, Iter):
            continue
        if not la.free_vars(node.domain) <= params | {node.var}:
            continue
        if framed is not None and is_framed(node) != framed:
            continue
        empty = la.forall(node.var, la.neg(node.domain))
        if not la.is_satisfiable(la.conj(st.constraint, empty)):
            continue
        nonempty = la.exists(node.var, node.domain)
        left = State(st.pattern, add_constraint(st.constraint, nonempty), st.lits, st.params)
        right = State(replace_at(st.pattern, pos, node.neutral), add_constraint(st.constraint, empty), st.lits, st.params)
        return Application("constraintsplit", [left, right], [pos], {"domain": str(node.domain)})
    return None


# ---------------------------------------------------------------------------
# instantiate


def instantiate_at(st: State, pos: Position, e: LinearExpr, ctx: Constraint) -> Pattern:
    node = get_at(st.pattern, pos)
    assert isinstance(node, Iter)
    used = st.used_names()
    inst = rename_binders(subst_pattern(node.body, {node.var: e}), used)
    dom = tidy_domain(la.conj(node.domain, la.ne(node.var, e)), node.var, ctx)
    rest = Iter(node.kind, node.var, dom, node.body)
    return replace_at(st.pattern, pos, mk_op(node.kind, inst, rest))


def _instance_candidates(node: Iter) -> List[LinearExpr]:
    fb = la.frame_bounds(node.domain, node.var)
    if fb is not None:
        return [fb[1]]
    lows, highs = _bound_terms(node.domain, node.var)
    return list(dict.fromkeys(highs + lows))


def find_instance(st: State, framed_only: bool = False):
    """First iteration (pre-order) with an instance that the context guarantees."""
    for pos, node, enc in walk(st.pattern):
        if not isinstance(node, Iter):
            continue
        if framed_only and not is_framed(node):
            continue
        ctx = pctx(st.constraint, enc)
        for e in _instance_candidates(node) if not framed_only else [la.frame_bounds(node.domain, node.var)[1]]:
            inside = la.apply_subst(node.domain, {node.var: e})
            if la.entails(ctx, inside):
                return pos, e, ctx
    return None


def rule_instantiate(st: State) -> Optional[Application]:
    found = find_instance(st)
    if found is None:
        return None
    pos, e, ctx = found
    new = instantiate_at(st, pos, e, ctx)
    return Application("instantiate", [State(new, st.constraint, st.lits, st.params)], [pos], {"term": str(e)})


def _unfold_once(p: Pattern, ctx: Constraint, used: Set[str], count: List[int]) -> Pattern:
    if isinstance(p, (Conj, Disj)):
        kids = [_unfold_once(a, ctx, used, count) for a in p.args]
        return mk_and(*kids) if isinstance(p, Conj) else mk_or(*kids)
    if not isinstance(p, Iter):
        return p
    fb = la.frame_bounds(p.domain, p.var)
    if fb is not None and la.entails(ctx, la.apply_subst(p.domain, {p.var: fb[1]})):
        count[0] += 1
        inst = rename_binders(subst_pattern(p.body, {p.var: fb[1]}), used)
        inst = _unfold_once(inst, ctx, used, count)
        dom = la.frame(p.var, fb[0], fb[1] - 1)
        body = _unfold_once(p.body, la.conj(ctx, dom), used, count)
        return mk_op(p.kind, inst, Iter(p.kind, p.var, dom, body))
    body = _unfold_once(p.body, la.conj(ctx, p.domain), used, count)
    return p if body is p.body else Iter(p.kind, p.var, p.domain, body)


def rule_instantiate_frames(st: State) -> Optional[Application]:
    """Unfold every framed iteration once at its upper bound."""
    count = [0]
    new = _unfold_once(st.pattern, st.constraint, st.used_names(), count)
    if not count[0]:
        return None
    return Application("instantiate", [State(new, st.constraint, st.lits, st.params)], info={"count": count[0]})


# ---------------------------------------------------------------------------
# emptiness and intervalise


def rule_emptiness(st: State) -> Optional[Application]:
    params = set(st.params)
    for pos, outer, enc in walk(st.pattern):
        if not isinstance(outer, Iter):
            continue
        x = outer.var
        for rel, inner, enc2 in walk(outer.body, (), ((x, outer.domain),)):
            if not isinstance(inner, Iter) or x not in la.free_vars(inner.domain):
                continue
            if not la.free_vars(inner.domain) <= params | {x, inner.var}:
                continue
            ctx = pctx(st.constraint, enc + enc2)
            empty = la.forall(inner.var, la.neg(inner.domain))
            if not la.is_satisfiable(la.conj(ctx, empty)):
                continue
            nonempty = la.exists(inner.var, inner.domain)
            octx = pctx(st.constraint, enc)
            d1 = tidy_domain(la.conj(outer.domain, la.eliminate_quantifiers(nonempty)), x, octx)
            d2 = tidy_domain(la.conj(outer.domain, la.eliminate_quantifiers(empty)), x, octx)
            body2 = replace_at(outer.body, rel, inner.neutral)
            used = st.used_names()
            second = rename_binders(Iter(outer.kind, x, d2, body2), used)
            first = Iter(outer.kind, x, d1, outer.body)
            new = replace_at(st.pattern, pos, mk_op(outer.kind, first, second))
            return Application("emptiness", [State(new, st.constraint, st.lits, st.params)], [pos, pos + (0,) + rel])
    return None


def rule_intervalise(st: State) -> Optional[Application]:
    params = set(st.params)
    for pos, node, _ in walk(st.pattern):
        if not isinstance(node, Iter):
            continue
        x = node.var
        if not la.free_vars(node.domain) <= params | {x}:
            continue
        parts = list(la.conjuncts(node.domain))
        for sign in (1, -1):
            bounds = [
                (i, a) for i, a in enumerate(parts)
                if isinstance(a, la.Le) and a.expr.coeff(x) * sign > 0
            ]
            if len(bounds) < 2:
                continue
            (i1, a1), (i2, a2) = bounds[0], bounds[1]
            k, l = abs(a1.expr.coeff(x)), abs(a2.expr.coeff(x))
            # a: sign*k*x + r1 <= 0  i.e.  sign*k*x <= -r1
            r1 = a1.expr - la.var(x) * a1.expr.coeff(x)
            r2 = a2.expr - la.var(x) * a2.expr.coeff(x)
            # first bound is the tighter one iff l*(-r1) <= k*(-r2) (scaled by sign)
            tighter = la.mk_le(r2 * k - r1 * l)
            keep1 = la.conj(*(a for j, a in enumerate(parts) if j != i2))
            keep2 = la.conj(*(a for j, a in enumerate(parts) if j != i1))
            left = State(replace_at(st.pattern, pos, Iter(node.kind, x, keep1, node.body)),
                         add_constraint(st.constraint, tighter), st.lits, st.params)
            right = State(replace_at(st.pattern, pos, Iter(node.kind, x, keep2, node.body)),
                          add_constraint(st.constraint, la.neg(tighter)), st.lits, st.params)
            return Application("intervalise", [left, right], [pos])
    return None
