"""Iterated propositional schemata: patterns, realization, occurrence tests."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from . import linarith as la
from .ground import PFALSE, PLit, PTRUE, PropFormula, literals_of, pand, por
from .linarith import Constraint, LinearExpr

Position = Tuple[int, ...]


class Pattern:
    """Base class of patterns; nodes are immutable with a cached hash."""

    __slots__ = ()

    def __hash__(self) -> int:
        try:
            return self.__dict__["_h"]
        except KeyError:
            h = hash((type(self).__name__,) + self._key())
            self.__dict__["_h"] = h
            return h

    def _key(self) -> tuple:
        return ()

    def __str__(self) -> str:
        from .syntax import format_pattern

        return format_pattern(self)

    def children(self) -> Tuple["Pattern", ...]:
        return ()

    def with_children(self, kids: Sequence["Pattern"]) -> "Pattern":
        return self


def _node(cls):
    cls = dataclass(frozen=True, eq=True)(cls)
    cls.__hash__ = Pattern.__hash__
    return cls


@_node
class Top(Pattern):
    def __repr__(self):
        return "TOP"


@_node
class Bottom(Pattern):
    def __repr__(self):
        return "BOTTOM"


TOP = Top()
BOTTOM = Bottom()


@_node
class Lit(Pattern):
    """An indexed literal ``p_{e1..ek}`` or its negation."""

    symbol: str
    indices: Tuple[LinearExpr, ...] = ()
    positive: bool = True

    def _key(self):
        return (self.symbol, self.indices, self.positive)

    @property
    def atom(self) -> Tuple[str, Tuple[LinearExpr, ...]]:
        return (self.symbol, self.indices)

    def complement(self) -> "Lit":
        return Lit(self.symbol, self.indices, not self.positive)

    def variables(self) -> frozenset:
        return frozenset().union(*(e.variables for e in self.indices)) if self.indices else frozenset()

    def __repr__(self):
        return f"Lit({self})"


def lit(symbol: str, *indices: la.ExprLike, positive: bool = True) -> Lit:
    return Lit(symbol, tuple(LinearExpr.lift(e) for e in indices), positive)


@_node
class Conj(Pattern):
    args: Tuple[Pattern, ...]

    def _key(self):
        return self.args

    def children(self):
        return self.args

    def with_children(self, kids):
        return Conj(tuple(kids))


@_node
class Disj(Pattern):
    args: Tuple[Pattern, ...]

    def _key(self):
        return self.args

    def children(self):
        return self.args

    def with_children(self, kids):
        return Disj(tuple(kids))


@_node
class Iter(Pattern):
    """``And``/``Or`` iteration of ``body`` over ``var`` ranging in ``domain``."""

    kind: str  # "and" | "or"
    var: str
    domain: Constraint
    body: Pattern

    def _key(self):
        return (self.kind, self.var, self.domain, self.body)

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Iter(self.kind, self.var, self.domain, kids[0])

    @property
    def neutral(self) -> Pattern:
        return TOP if self.kind == "and" else BOTTOM


# Surface connectives, removed by desugar_to_nnf.


@_node
class Neg(Pattern):
    arg: Pattern

    def _key(self):
        return (self.arg,)

    def children(self):
        return (self.arg,)

    def with_children(self, kids):
        return Neg(kids[0])


@_node
class Implies(Pattern):
    left: Pattern
    right: Pattern

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return Implies(*kids)


@_node
class Iff(Pattern):
    left: Pattern
    right: Pattern

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return Iff(*kids)


@_node
class Xor(Pattern):
    left: Pattern
    right: Pattern

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return Xor(*kids)


SURFACE = (Neg, Implies, Iff, Xor)


def mk_and(*args: Pattern) -> Pattern:
    out: List[Pattern] = []
    for a in args:
        if isinstance(a, Conj):
            out.extend(a.args)
        else:
            out.append(a)
    if not out:
        return TOP
    return out[0] if len(out) == 1 else Conj(tuple(out))


def mk_or(*args: Pattern) -> Pattern:
    out: List[Pattern] = []
    for a in args:
        if isinstance(a, Disj):
            out.extend(a.args)
        else:
            out.append(a)
    if not out:
        return BOTTOM
    return out[0] if len(out) == 1 else Disj(tuple(out))


def mk_op(kind: str, *args: Pattern) -> Pattern:
    return mk_and(*args) if kind == "and" else mk_or(*args)


def big_and(var: str, domain: Constraint, body: Pattern) -> Iter:
    return Iter("and", var, domain, body)


def big_or(var: str, domain: Constraint, body: Pattern) -> Iter:
    return Iter("or", var, domain, body)


@dataclass(frozen=True)
class Schema:
    pattern: Pattern
    constraint: Constraint = la.TRUE
    params: Optional[Tuple[str, ...]] = None
    name: str = ""

    @property
    def parameters(self) -> Tuple[str, ...]:
        if self.params is not None:
            return self.params
        return tuple(sorted(pattern_free_vars(self.pattern) | la.free_vars(self.constraint)))

    def __str__(self):
        from .syntax import format_schema

        return format_schema(self)


# ---------------------------------------------------------------------------
# Traversal


def negate_nnf(p: Pattern) -> Pattern:
    if isinstance(p, Top):
        return BOTTOM
    if isinstance(p, Bottom):
        return TOP
    if isinstance(p, Lit):
        return p.complement()
    if isinstance(p, Conj):
        return Disj(tuple(negate_nnf(a) for a in p.args))
    if isinstance(p, Disj):
        return Conj(tuple(negate_nnf(a) for a in p.args))
    if isinstance(p, Iter):
        return Iter("or" if p.kind == "and" else "and", p.var, p.domain, negate_nnf(p.body))
    raise TypeError(f"not in NNF: {p!r}")


def desugar_to_nnf(p: Pattern, positive: bool = True) -> Pattern:
    """Remove ``->``, ``<->``, ``xor`` and push negations to the literals."""
    if isinstance(p, (Top, Bottom)):
        return p if positive else negate_nnf(p)
    if isinstance(p, Lit):
        return p if positive else p.complement()
    if isinstance(p, Neg):
        return desugar_to_nnf(p.arg, not positive)
    if isinstance(p, Conj):
        parts = [desugar_to_nnf(a, positive) for a in p.args]
        return mk_and(*parts) if positive else mk_or(*parts)
    if isinstance(p, Disj):
        parts = [desugar_to_nnf(a, positive) for a in p.args]
        return mk_or(*parts) if positive else mk_and(*parts)
    if isinstance(p, Iter):
        kind = p.kind if positive else ("or" if p.kind == "and" else "and")
        return Iter(kind, p.var, p.domain, desugar_to_nnf(p.body, positive))
    if isinstance(p, Implies):
        return desugar_to_nnf(Disj((Neg(p.left), p.right)), positive)
    if isinstance(p, Iff):
        a, b = p.left, p.right
        return desugar_to_nnf(Conj((Implies(a, b), Implies(b, a))), positive)
    if isinstance(p, Xor):
        return desugar_to_nnf(Iff(p.left, p.right), not positive)
    raise TypeError(p)


def is_nnf(p: Pattern) -> bool:
    if isinstance(p, SURFACE):
        return False
    return all(is_nnf(c) for c in p.children())


_fv_cache: Dict[Pattern, frozenset] = {}


def pattern_free_vars(p: Pattern) -> frozenset:
    r = _fv_cache.get(p)
    if r is not None:
        return r
    if isinstance(p, Lit):
        r = p.variables()
    elif isinstance(p, Iter):
        r = (pattern_free_vars(p.body) | la.free_vars(p.domain)) - {p.var}
    else:
        r = frozenset().union(*(pattern_free_vars(c) for c in p.children())) if p.children() else frozenset()
    if len(_fv_cache) > 200_000:
        _fv_cache.clear()
    _fv_cache[p] = r
    return r


def subst_pattern(p: Pattern, sub: Mapping[str, LinearExpr]) -> Pattern:
    """Substitute free variables; binders shadow and capture is rejected."""
    if not sub:
        return p
    fv = pattern_free_vars(p)
    sub = {k: v for k, v in sub.items() if k in fv}
    if not sub:
        return p
    if isinstance(p, Lit):
        return Lit(p.symbol, tuple(e.subst(sub) for e in p.indices), p.positive)
    if isinstance(p, Iter):
        inner = {k: v for k, v in sub.items() if k != p.var}
        if any(p.var in v.variables for v in inner.values()):
            raise la.CaptureError(f"substitution captures {p.var}")
        return Iter(p.kind, p.var, la.apply_subst(p.domain, inner), subst_pattern(p.body, inner))
    return p.with_children([subst_pattern(c, sub) for c in p.children()])


Pattern.subst = subst_pattern  # type: ignore[attr-defined]


def binders(p: Pattern) -> List[str]:
    out: List[str] = []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Iter):
            out.append(q.var)
        stack.extend(reversed(q.children()))
    return out


def all_vars(p: Pattern) -> Set[str]:
    s: Set[str] = set(binders(p))
    s |= pattern_free_vars(p)
    for _, node, _ in walk(p):
        if isinstance(node, Iter):
            s |= la.free_vars(node.domain)
    return s


Enclosing = Tuple[Tuple[str, Constraint], ...]


def walk(p: Pattern, pos: Position = (), enc: Enclosing = ()) -> Iterator[Tuple[Position, Pattern, Enclosing]]:
    """Pre-order traversal yielding (position, node, enclosing binders)."""
    yield pos, p, enc
    if isinstance(p, Iter):
        yield from walk(p.body, pos + (0,), enc + ((p.var, p.domain),))
    else:
        for i, c in enumerate(p.children()):
            yield from walk(c, pos + (i,), enc)


def get_at(p: Pattern, pos: Position) -> Pattern:
    for i in pos:
        p = p.children()[i]
    return p


def replace_at(p: Pattern, pos: Position, new: Pattern) -> Pattern:
    if not pos:
        return new
    kids = list(p.children())
    kids[pos[0]] = replace_at(kids[pos[0]], pos[1:], new)
    if isinstance(p, Conj):
        return mk_and(*kids)
    if isinstance(p, Disj):
        return mk_or(*kids)
    return p.with_children(kids)


def enclosing_at(p: Pattern, pos: Position) -> Enclosing:
    enc: List[Tuple[str, Constraint]] = []
    for i in pos:
        if isinstance(p, Iter):
            enc.append((p.var, p.domain))
        p = p.children()[i]
    return tuple(enc)


def occurrences(p: Pattern) -> List[Tuple[Position, Lit, Enclosing]]:
    return [(pos, n, enc) for pos, n, enc in walk(p) if isinstance(n, Lit)]


def fresh_name(base: str, used: Set[str]) -> str:
    base = base.rstrip("0123456789") or "x"
    k = 1
    while f"{base}{k}" in used:
        k += 1
    name = f"{base}{k}"
    used.add(name)
    return name


def rename_binders(p: Pattern, used: Set[str]) -> Pattern:
    """Give every binder of ``p`` a name not in ``used`` (which is updated)."""
    if isinstance(p, Iter):
        new = fresh_name(p.var, used)
        x = la.var(new)
        body = subst_pattern(p.body, {p.var: x})
        dom = la.rename_bound(p.domain, p.var, new)
        return Iter(p.kind, new, dom, rename_binders(body, used))
    kids = p.children()
    if not kids:
        return p
    return p.with_children([rename_binders(c, used) for c in kids])


def unique_binders(p: Pattern, used: Set[str]) -> Pattern:
    """Rename only binders whose name is already in ``used``; first uses keep their name."""
    if isinstance(p, Iter):
        if p.var in used:
            new = fresh_name(p.var, used)
            body = subst_pattern(p.body, {p.var: la.var(new)})
            return Iter(p.kind, new, la.rename_bound(p.domain, p.var, new), unique_binders(body, used))
        used.add(p.var)
        return Iter(p.kind, p.var, p.domain, unique_binders(p.body, used))
    kids = p.children()
    if not kids:
        return p
    return p.with_children([unique_binders(c, used) for c in kids])


def intern_pattern(p: Pattern, table: Dict[Pattern, Pattern]) -> Pattern:
    """Equal subtrees become one shared object through ``table``."""
    hit = table.get(p)
    if hit is not None:
        return hit
    kids = p.children()
    if kids:
        new = [intern_pattern(k, table) for k in kids]
        if any(a is not b for a, b in zip(new, kids)):
            p = p.with_children(new)
    table[p] = p
    return p


def alpha_canonical(p: Pattern, counter: Optional[List[int]] = None) -> Pattern:
    """Rename binders to ``#0``, ``#1``... in pre-order."""
    if counter is None:
        counter = [0]
    return _alpha(p, {}, counter)


def _alpha(p: Pattern, ren: Dict[str, LinearExpr], counter: List[int]) -> Pattern:
    if isinstance(p, Lit):
        if not any(v in ren for e in p.indices for v, _ in e.coeffs):
            return p
        return Lit(p.symbol, tuple(e.subst(ren) for e in p.indices), p.positive)
    if isinstance(p, Iter):
        new = f"#{counter[0]}"
        counter[0] += 1
        inner = dict(ren)
        inner[p.var] = la.var(new)
        dom = la.apply_subst(p.domain, inner)
        body = _alpha(p.body, inner, counter)
        if new == p.var and dom == p.domain and body is p.body:
            return p
        return Iter(p.kind, new, dom, body)
    kids = p.children()
    if not kids:
        return p
    new_kids = [_alpha(c, ren, counter) for c in kids]
    if all(a is b for a, b in zip(new_kids, kids)):
        return p
    return p.with_children(new_kids)


def alpha_key(p: Pattern) -> Pattern:
    """Representative of the alpha-equivalence class of ``p``."""
    if isinstance(p, (Lit, Top, Bottom)):
        return p
    return alpha_canonical(p)


def map_pattern_exprs(p: Pattern, f) -> Pattern:
    """Apply ``f`` to every index and domain expression."""
    if isinstance(p, Lit):
        return Lit(p.symbol, tuple(f(e) for e in p.indices), p.positive)
    if isinstance(p, Iter):
        return Iter(p.kind, p.var, la.map_exprs(p.domain, f), map_pattern_exprs(p.body, f))
    kids = p.children()
    if not kids:
        return p
    return p.with_children([map_pattern_exprs(c, f) for c in kids])


# ---------------------------------------------------------------------------
# Realization


def ground_atom_name(symbol: str, values: Sequence[int]) -> str:
    if not values:
        return symbol
    return f"{symbol}({','.join(map(str, values))})"


def realize_pattern(p: Pattern, env: Mapping[str, int]) -> PropFormula:
    if isinstance(p, Top):
        return PTRUE
    if isinstance(p, Bottom):
        return PFALSE
    if isinstance(p, Lit):
        vals = [e.evaluate(env) for e in p.indices]
        return PLit(ground_atom_name(p.symbol, vals), p.positive)
    if isinstance(p, Conj):
        return pand(realize_pattern(a, env) for a in p.args)
    if isinstance(p, Disj):
        return por(realize_pattern(a, env) for a in p.args)
    if isinstance(p, Iter):
        vals = la.solution_range(p.domain, p.var, env)
        parts = []
        inner = dict(env)
        for v in vals:
            inner[p.var] = v
            parts.append(realize_pattern(p.body, inner))
        return pand(parts) if p.kind == "and" else por(parts)
    raise TypeError(f"not in NNF: {p!r}")


def realize(s: Schema, env: Mapping[str, int]) -> PropFormula:
    """Ground formula of ``s`` under ``env``; ``false`` if ``env`` violates the constraint."""
    if not la.evaluate(s.constraint, {k: env[k] for k in la.free_vars(s.constraint)}):
        return PFALSE
    return realize_pattern(s.pattern, env)


def satisfying_envs(c: Constraint, params: Sequence[str], bound: int) -> Iterator[Dict[str, int]]:
    """Environments in ``[0..bound]^params`` satisfying ``c``."""
    for vals in itertools.product(range(bound + 1), repeat=len(params)):
        env = dict(zip(params, vals))
        if la.evaluate(c, env):
            yield env


# ---------------------------------------------------------------------------
# Occurrence predicates


def context(s: Schema) -> Constraint:
    """The schema constraint together with every iteration domain."""
    doms = [n.domain for _, n, _ in walk(s.pattern) if isinstance(n, Iter)]
    return la.conj(s.constraint, *doms)


def _rename_apart(enc: Enclosing, index: Tuple[LinearExpr, ...], avoid: Set[str]):
    sub: Dict[str, LinearExpr] = {}
    out = []
    for x, dom in enc:
        if sub:
            dom = la.apply_subst(dom, sub)
        if x in avoid:
            new = fresh_name(x + "_", avoid)
            sub[x] = la.var(new)
            dom = la.rename_bound(dom, x, new)
            x = new
        else:
            avoid.add(x)
        out.append((x, dom))
    if sub:
        index = tuple(e.subst(sub) for e in index)
    return tuple(out), index


def unify_matrix(target: Tuple[LinearExpr, ...], enc: Enclosing, index: Tuple[LinearExpr, ...], avoid: Set[str]) -> Constraint:
    """Matrix of ``unify_formula``, binders renamed away from ``avoid`` and left free."""
    if len(target) != len(index):
        return la.FALSE
    enc, index = _rename_apart(enc, index, set(avoid))
    return la.conj(*(d for _, d in enc), *(la.eq(a, b) for a, b in zip(target, index)))


def unify_formula(target: Tuple[LinearExpr, ...], enc: Enclosing, index: Tuple[LinearExpr, ...], avoid: Set[str]) -> Constraint:
    """``exists binders (domains /\\ target = index)``."""
    if len(target) != len(index):
        return la.FALSE
    enc, index = _rename_apart(enc, index, set(avoid))
    body = la.conj(*(d for _, d in enc), *(la.eq(a, b) for a, b in zip(target, index)))
    return la.exists_many([x for x, _ in enc], body)


def occur_formula(L: Lit, s: Schema) -> Constraint:
    """Disjunction over same-sign occurrences of L of the unification condition."""
    avoid = set(L.variables()) | set(s.parameters)
    parts = []
    for _, occ, enc in occurrences(s.pattern):
        if occ.symbol != L.symbol or occ.positive != L.positive:
            continue
        parts.append(unify_formula(L.indices, enc, occ.indices, avoid))
    return la.disj(*parts)


def _syntactic_always(L: Lit, s: Schema) -> bool:
    for _, occ, enc in occurrences(s.pattern):
        if not enc and occ == L:
            return True
    return False


def always_occurs_counterexample(L: Lit, s: Schema) -> Optional[Dict[str, int]]:
    """None when L occurs in every realization, else an environment where it does not."""
    if _syntactic_always(L, s):
        return None
    phi = occur_formula(L, s)
    small = _small_counterexample(s.constraint, phi, set(s.parameters))
    if small is not None:
        return small
    parts = phi.args if isinstance(phi, la.Or) else (phi,)
    if any(la.entails(s.constraint, la.eliminate_quantifiers(part)) for part in parts):
        return None
    return la.satisfying_assignment(la.conj(s.constraint, la.neg(phi)))


def _small_counterexample(C: Constraint, phi: Constraint, params: Set[str], bound: int = 4) -> Optional[Dict[str, int]]:
    # Cheap search before quantifier elimination: at a ground environment each
    # existential disjunct of phi is a plain satisfiability question.
    names = sorted(la.free_vars(C) | la.free_vars(phi))
    if len(names) > 2:
        return None
    ranges = [range(bound + 1) if x in params else range(-bound, bound + 1) for x in names]
    parts = phi.args if isinstance(phi, la.Or) else (phi,)
    for vals in itertools.product(*ranges):
        env = dict(zip(names, vals))
        if not la.evaluate(C, env):
            continue
        sub = {x: la.const(v) for x, v in env.items()}
        if not any(la.is_satisfiable(la.apply_subst(part, sub)) for part in parts):
            return env
    return None


def always_occurs(L: Lit, s: Schema) -> bool:
    return always_occurs_counterexample(L, s) is None


def may_belong_witness(L: Lit, s: Schema) -> Optional[Dict[str, int]]:
    """An environment in which L occurs, or None."""
    phi = occur_formula(L, s)
    return la.satisfying_assignment(la.conj(s.constraint, phi))


def may_belong(L: Lit, s: Schema) -> bool:
    return may_belong_witness(L, s) is not None


def literal_set(s: Schema) -> Set[Lit]:
    """Parameter-indexed literals occurring in every realization of ``s``."""
    params = s.parameters
    w = la.satisfying_assignment(s.constraint)
    if w is None:
        return set()
    env = {p: w.get(p, 0) for p in params}
    ground = literals_of(realize_pattern(s.pattern, env))
    syntactic: Dict[int, Set[LinearExpr]] = {}
    for _, occ, _ in occurrences(s.pattern):
        for e in occ.indices:
            if e.variables <= set(params):
                syntactic.setdefault(e.evaluate(env), set()).add(e)
    out: Set[Lit] = set()
    checked: Set[Lit] = set()
    for g in ground:
        symbol, vals = _parse_ground(g.name)
        options = []
        for v in vals:
            cands = {LinearExpr(v)} | syntactic.get(v, set())
            cands |= {la.var(p) + (v - env[p]) for p in params}
            options.append(sorted(cands, key=str))
        for idx in itertools.product(*options):
            cand = Lit(symbol, tuple(idx), g.positive)
            if cand in checked:
                continue
            checked.add(cand)
            if always_occurs(cand, s):
                out.add(cand)
    return out


def _parse_ground(name: str) -> Tuple[str, List[int]]:
    if "(" not in name:
        return name, []
    sym, rest = name.split("(", 1)
    return sym, [int(x) for x in rest.rstrip(")").split(",")]


def replace_atom(p: Pattern, symbol: str, indices: Tuple[LinearExpr, ...], value: Pattern) -> Pattern:
    """Replace positive occurrences of the atom by ``value`` and negative ones by its negation."""
    if isinstance(p, Lit):
        if p.symbol == symbol and p.indices == indices:
            return value if p.positive else negate_nnf(value)
        return p
    kids = p.children()
    if not kids:
        return p
    new = [replace_atom(c, symbol, indices, value) for c in kids]
    if all(a is b for a, b in zip(new, kids)):
        return p
    if isinstance(p, Conj):
        return mk_and(*new)
    if isinstance(p, Disj):
        return mk_or(*new)
    return p.with_children(new)


def replace_literal_occurrences(p: Pattern, L: Lit, replacement: Pattern) -> Pattern:
    """Occurrences of L become ``replacement``; occurrences of its complement become the negation."""
    value = replacement if L.positive else negate_nnf(replacement)
    return replace_atom(p, L.symbol, L.indices, value)


# ---------------------------------------------------------------------------
# Well-formedness


def check_wellformed(s: Schema) -> List[str]:
    """Diagnostics; an empty list means the schema is well formed."""
    errs: List[str] = []
    p = s.pattern
    params = set(s.parameters)
    if not is_nnf(p):
        errs.append("pattern is not in negation normal form")
        return errs
    seen: Set[str] = set()
    arity: Dict[str, int] = {}
    for pos, node, enc in walk(p):
        scope = params | {x for x, _ in enc}
        if isinstance(node, Iter):
            if node.var in seen:
                errs.append(f"binder {node.var} is bound twice")
            if node.var in params:
                errs.append(f"binder {node.var} clashes with a parameter")
            seen.add(node.var)
            extra = la.free_vars(node.domain) - scope - {node.var}
            if extra:
                errs.append(f"domain of {node.var} mentions unbound {sorted(extra)}")
            elif not la.encloses(node.domain, node.var):
                errs.append(f"domain of {node.var} does not enclose it: {node.domain}")
        elif isinstance(node, Lit):
            k = arity.setdefault(node.symbol, len(node.indices))
            if k != len(node.indices):
                errs.append(f"symbol {node.symbol} used with arities {k} and {len(node.indices)}")
            extra = node.variables() - scope
            if extra:
                errs.append(f"index of {node.symbol} mentions unbound {sorted(extra)}")
    extra = la.free_vars(s.constraint) - params
    if extra:
        errs.append(f"constraint mentions non-parameters {sorted(extra)}")
    for x in sorted(params):
        if not la.entails(s.constraint, la.ge(x, 0)):
            errs.append(f"constraint does not entail {x} >= 0")
    return errs
