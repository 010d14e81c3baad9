"""Linear integer arithmetic: expressions, constraints, quantifier elimination.

Constraints are kept in a canonical atomic form (``e = 0``, ``e <= 0`` and,
internally, ``m | e``).  Satisfiability is decided by a DNF search over an
exact conjunction solver (unit substitution, exact Fourier-Motzkin shadows,
Cooper splitting when the shadow is inexact).  Quantifiers are eliminated by
projecting each disjunct.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from math import gcd
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

Env = Mapping[str, int]


class CaptureError(ValueError):
    """Substituting would capture a variable under a quantifier."""


class UnboundVariable(KeyError):
    pass


class NotEnclosedError(ValueError):
    """A domain admits infinitely many values for its variable."""


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# ---------------------------------------------------------------------------
# Linear expressions


@dataclass(frozen=True)
class LinearExpr:
    constant: int = 0
    coeffs: Tuple[Tuple[str, int], ...] = ()

    @staticmethod
    def make(coeffs: Mapping[str, int], constant: int = 0) -> "LinearExpr":
        return LinearExpr(constant, tuple(sorted((v, c) for v, c in coeffs.items() if c)))

    @staticmethod
    def lift(x: "ExprLike") -> "LinearExpr":
        if isinstance(x, LinearExpr):
            return x
        if isinstance(x, bool):
            raise TypeError("bool is not an expression")
        if isinstance(x, int):
            return LinearExpr(x)
        if isinstance(x, str):
            return LinearExpr(0, ((x, 1),))
        raise TypeError(f"cannot build an expression from {x!r}")

    def as_dict(self) -> Dict[str, int]:
        return dict(self.coeffs)

    @property
    def variables(self) -> frozenset:
        return frozenset(v for v, _ in self.coeffs)

    def coeff(self, v: str) -> int:
        for w, c in self.coeffs:
            if w == v:
                return c
        return 0

    def is_ground(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "ExprLike") -> "LinearExpr":
        other = LinearExpr.lift(other)
        d = dict(self.coeffs)
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinearExpr.make(d, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "LinearExpr":
        return LinearExpr(-self.constant, tuple((v, -c) for v, c in self.coeffs))

    def __sub__(self, other: "ExprLike") -> "LinearExpr":
        return self + (-LinearExpr.lift(other))

    def __rsub__(self, other: "ExprLike") -> "LinearExpr":
        return LinearExpr.lift(other) - self

    def __mul__(self, k: int) -> "LinearExpr":
        if not isinstance(k, int):
            return NotImplemented
        if k == 0:
            return LinearExpr()
        return LinearExpr(self.constant * k, tuple((v, c * k) for v, c in self.coeffs))

    __rmul__ = __mul__

    def subst(self, sub: Mapping[str, "LinearExpr"]) -> "LinearExpr":
        if not any(v in sub for v, _ in self.coeffs):
            return self
        d: Dict[str, int] = {}
        const = self.constant
        for v, c in self.coeffs:
            if v in sub:
                r = LinearExpr.lift(sub[v])
                const += c * r.constant
                for w, b in r.coeffs:
                    d[w] = d.get(w, 0) + c * b
            else:
                d[v] = d.get(v, 0) + c
        return LinearExpr.make(d, const)

    def evaluate(self, env: Env) -> int:
        total = self.constant
        for v, c in self.coeffs:
            try:
                total += c * env[v]
            except KeyError:
                raise UnboundVariable(v) from None
        return total

    def __str__(self) -> str:
        return _fmt_terms(dict(self.coeffs), self.constant)

    def __repr__(self) -> str:
        return f"LinearExpr({self})"


ExprLike = Union[LinearExpr, int, str]


def var(name: str) -> LinearExpr:
    return LinearExpr(0, ((name, 1),))


def const(k: int) -> LinearExpr:
    return LinearExpr(k)


def _fmt_terms(d: Mapping[str, int], c: int) -> str:
    parts: List[str] = []
    pos = sorted(v for v, a in d.items() if a > 0)
    neg = sorted(v for v, a in d.items() if a < 0)
    for v in pos + neg:
        a = d[v]
        mag = abs(a)
        term = v if mag == 1 else f"{mag}*{v}"
        if not parts:
            parts.append(term if a > 0 else "-" + term)
        else:
            parts.append(("+ " if a > 0 else "- ") + term)
    if not parts:
        return str(c)
    if c > 0:
        parts.append(f"+ {c}")
    elif c < 0:
        parts.append(f"- {-c}")
    return " ".join(parts)


def normalize_expr(tree) -> LinearExpr:
    """Normalise a small expression tree.

    Trees are ints, variable names, ``('s', t)`` for successor, and
    ``('+', a, b)``, ``('-', a, b)``, ``('neg', a)``, ``('*', k, a)``.
    """
    if isinstance(tree, LinearExpr):
        return tree
    if isinstance(tree, (int, str)):
        return LinearExpr.lift(tree)
    op = tree[0]
    if op == "s":
        return normalize_expr(tree[1]) + 1
    if op == "+":
        return normalize_expr(tree[1]) + normalize_expr(tree[2])
    if op == "-":
        return normalize_expr(tree[1]) - normalize_expr(tree[2])
    if op == "neg":
        return -normalize_expr(tree[1])
    if op == "*":
        k, e = tree[1], tree[2]
        if not isinstance(k, int):
            k, e = e, k
        if not isinstance(k, int):
            raise ValueError("non-linear product")
        return normalize_expr(e) * k
    raise ValueError(f"unknown expression node {op!r}")


# ---------------------------------------------------------------------------
# Constraints


class Constraint:
    """Base class of arithmetic constraints (immutable, hashable)."""

    __slots__ = ()

    def __and__(self, other: "Constraint") -> "Constraint":
        return conj(self, other)

    def __or__(self, other: "Constraint") -> "Constraint":
        return disj(self, other)

    def __invert__(self) -> "Constraint":
        return neg(self)

    def __str__(self) -> str:
        return format_constraint(self)

    def __hash__(self) -> int:
        try:
            return self.__dict__["_h"]
        except KeyError:
            h = hash((type(self).__name__,) + self._key())
            self.__dict__["_h"] = h
            return h

    def _key(self) -> tuple:
        raise NotImplementedError


def _node(cls):
    cls = dataclass(frozen=True, repr=False, eq=True)(cls)
    # keep the cached hash defined on the base class
    cls.__hash__ = Constraint.__hash__
    return cls


@_node
class Truth(Constraint):
    value: bool

    def _key(self):
        return (self.value,)

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Truth(True)
FALSE = Truth(False)


@_node
class Eq(Constraint):
    """``expr = 0``"""

    expr: LinearExpr

    def _key(self):
        return (self.expr,)

    def __repr__(self):
        return f"Eq({self})"


@_node
class Le(Constraint):
    """``expr <= 0``"""

    expr: LinearExpr

    def _key(self):
        return (self.expr,)

    def __repr__(self):
        return f"Le({self})"


@_node
class Div(Constraint):
    """``modulus | expr``"""

    modulus: int
    expr: LinearExpr

    def _key(self):
        return (self.modulus, self.expr)

    def __repr__(self):
        return f"Div({self})"


@_node
class Not(Constraint):
    arg: Constraint

    def _key(self):
        return (self.arg,)

    def __repr__(self):
        return f"Not({self.arg!r})"


@_node
class And(Constraint):
    args: Tuple[Constraint, ...]

    def _key(self):
        return self.args

    def __repr__(self):
        return f"And{self.args!r}"


@_node
class Or(Constraint):
    args: Tuple[Constraint, ...]

    def _key(self):
        return self.args

    def __repr__(self):
        return f"Or{self.args!r}"


@_node
class Exists(Constraint):
    var: str
    body: Constraint

    def _key(self):
        return (self.var, self.body)

    def __repr__(self):
        return f"Exists({self.var}, {self.body!r})"


@_node
class Forall(Constraint):
    var: str
    body: Constraint

    def _key(self):
        return (self.var, self.body)

    def __repr__(self):
        return f"Forall({self.var}, {self.body!r})"


_ATOMS = (Eq, Le, Div)


def _ground_truth(b: bool) -> Truth:
    return TRUE if b else FALSE


def mk_le(e: LinearExpr) -> Constraint:
    """Canonical ``e <= 0`` with gcd tightening."""
    if not e.coeffs:
        return _ground_truth(e.constant <= 0)
    g = 0
    for _, a in e.coeffs:
        g = gcd(g, a)
    if g > 1:
        e = LinearExpr(-((-e.constant) // g), tuple((v, a // g) for v, a in e.coeffs))
    return Le(e)


def mk_eq(e: LinearExpr) -> Constraint:
    if not e.coeffs:
        return _ground_truth(e.constant == 0)
    g = 0
    for _, a in e.coeffs:
        g = gcd(g, a)
    if e.constant % g:
        return FALSE
    if g > 1:
        e = LinearExpr(e.constant // g, tuple((v, a // g) for v, a in e.coeffs))
    if e.coeffs[0][1] < 0:
        e = -e
    return Eq(e)


def mk_div(m: int, e: LinearExpr) -> Constraint:
    m = abs(m)
    if m == 0:
        return mk_eq(e)
    coeffs = tuple((v, a % m) for v, a in e.coeffs if a % m)
    c = e.constant % m
    if not coeffs:
        return _ground_truth(c == 0)
    g = m
    for _, a in coeffs:
        g = gcd(g, a)
    g = gcd(g, c)
    if g > 1:
        m //= g
        coeffs = tuple((v, a // g) for v, a in coeffs)
        c //= g
    if m == 1:
        return TRUE
    return Div(m, LinearExpr(c, coeffs))


def atom(lhs: ExprLike, rel: str, rhs: ExprLike) -> Constraint:
    """Build the canonical constraint for ``lhs rel rhs``."""
    d = LinearExpr.lift(lhs) - LinearExpr.lift(rhs)
    if rel == "=":
        return mk_eq(d)
    if rel == "!=":
        return neg(mk_eq(d))
    if rel == "<=":
        return mk_le(d)
    if rel == "<":
        return mk_le(d + 1)
    if rel == ">=":
        return mk_le(-d)
    if rel == ">":
        return mk_le(-d + 1)
    raise ValueError(f"unknown relation {rel!r}")


def eq(a: ExprLike, b: ExprLike) -> Constraint:
    return atom(a, "=", b)


def ne(a: ExprLike, b: ExprLike) -> Constraint:
    return atom(a, "!=", b)


def le(a: ExprLike, b: ExprLike) -> Constraint:
    return atom(a, "<=", b)


def lt(a: ExprLike, b: ExprLike) -> Constraint:
    return atom(a, "<", b)


def ge(a: ExprLike, b: ExprLike) -> Constraint:
    return atom(a, ">=", b)


def gt(a: ExprLike, b: ExprLike) -> Constraint:
    return atom(a, ">", b)


def divides(m: int, e: ExprLike) -> Constraint:
    return mk_div(m, LinearExpr.lift(e))


def frame(x: str, lo: ExprLike, hi: ExprLike) -> Constraint:
    """The interval constraint ``lo <= x <= hi``."""
    return And((le(lo, x), le(x, hi)))


def conj(*args: Constraint) -> Constraint:
    out: List[Constraint] = []
    seen = set()
    stack = list(reversed(args))
    while stack:
        a = stack.pop()
        t = type(a)
        if t is And:
            stack.extend(reversed(a.args))
            continue
        if t is Truth:
            if a.value:
                continue
            return FALSE
        if a not in seen:
            seen.add(a)
            out.append(a)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*args: Constraint) -> Constraint:
    out: List[Constraint] = []
    seen = set()
    stack = list(reversed(args))
    while stack:
        a = stack.pop()
        t = type(a)
        if t is Or:
            stack.extend(reversed(a.args))
            continue
        if t is Truth:
            if a.value:
                return TRUE
            continue
        if a not in seen:
            seen.add(a)
            out.append(a)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(c: Constraint) -> Constraint:
    if isinstance(c, Truth):
        return _ground_truth(not c.value)
    if isinstance(c, Not):
        return c.arg
    if isinstance(c, Le):
        return mk_le(-c.expr + 1)
    return Not(c)


def implies(a: Constraint, b: Constraint) -> Constraint:
    return disj(neg(a), b)


def iff(a: Constraint, b: Constraint) -> Constraint:
    return conj(implies(a, b), implies(b, a))


def exists(x: str, body: Constraint) -> Constraint:
    if x not in free_vars(body):
        return body
    return Exists(x, body)


def forall(x: str, body: Constraint) -> Constraint:
    if x not in free_vars(body):
        return body
    return Forall(x, body)


def exists_many(xs: Iterable[str], body: Constraint) -> Constraint:
    for x in reversed(list(xs)):
        body = exists(x, body)
    return body


def forall_many(xs: Iterable[str], body: Constraint) -> Constraint:
    for x in reversed(list(xs)):
        body = forall(x, body)
    return body


@lru_cache(maxsize=1 << 16)
def free_vars(c: Constraint) -> frozenset:
    if isinstance(c, Truth):
        return frozenset()
    if isinstance(c, (Eq, Le, Div)):
        return c.expr.variables
    if isinstance(c, Not):
        return free_vars(c.arg)
    if isinstance(c, (And, Or)):
        return frozenset().union(*(free_vars(a) for a in c.args))
    if isinstance(c, (Exists, Forall)):
        return free_vars(c.body) - {c.var}
    raise TypeError(c)


def is_quantifier_free(c: Constraint) -> bool:
    if isinstance(c, (Exists, Forall)):
        return False
    if isinstance(c, Not):
        return is_quantifier_free(c.arg)
    if isinstance(c, (And, Or)):
        return all(is_quantifier_free(a) for a in c.args)
    return True


def conjuncts(c: Constraint) -> Tuple[Constraint, ...]:
    if isinstance(c, And):
        return c.args
    if c == TRUE:
        return ()
    return (c,)


def map_exprs(c: Constraint, f) -> Constraint:
    """Rebuild ``c`` with ``f`` applied to every atom expression."""
    if isinstance(c, Truth):
        return c
    if isinstance(c, Le):
        return mk_le(f(c.expr))
    if isinstance(c, Eq):
        return mk_eq(f(c.expr))
    if isinstance(c, Div):
        return mk_div(c.modulus, f(c.expr))
    if isinstance(c, Not):
        return neg(map_exprs(c.arg, f))
    if isinstance(c, And):
        return conj(*(map_exprs(a, f) for a in c.args))
    if isinstance(c, Or):
        return disj(*(map_exprs(a, f) for a in c.args))
    if isinstance(c, Exists):
        return Exists(c.var, map_exprs(c.body, f))
    if isinstance(c, Forall):
        return Forall(c.var, map_exprs(c.body, f))
    raise TypeError(c)


def rename_bound(c: Constraint, old: str, new: str) -> Constraint:
    """Rename free occurrences of ``old`` (no capture check)."""
    return _subst(c, {old: var(new)}, check=False)


def _subst(c: Constraint, sub: Mapping[str, LinearExpr], check: bool = True) -> Constraint:
    if not sub:
        return c
    if isinstance(c, Truth):
        return c
    if isinstance(c, Le):
        return mk_le(c.expr.subst(sub))
    if isinstance(c, Eq):
        return mk_eq(c.expr.subst(sub))
    if isinstance(c, Div):
        return mk_div(c.modulus, c.expr.subst(sub))
    if isinstance(c, Not):
        return neg(_subst(c.arg, sub, check))
    if isinstance(c, And):
        return conj(*(_subst(a, sub, check) for a in c.args))
    if isinstance(c, Or):
        return disj(*(_subst(a, sub, check) for a in c.args))
    if isinstance(c, (Exists, Forall)):
        fv = free_vars(c.body)
        inner = {k: v for k, v in sub.items() if k != c.var and k in fv}
        if not inner:
            return c
        if check and any(c.var in LinearExpr.lift(v).variables for v in inner.values()):
            raise CaptureError(f"substitution captures {c.var}")
        return type(c)(c.var, _subst(c.body, inner, check))
    raise TypeError(c)


def apply_subst(target, sub: Mapping[str, ExprLike]):
    """Simultaneous substitution into an expression, constraint or pattern."""
    sub = {k: LinearExpr.lift(v) for k, v in sub.items()}
    if isinstance(target, LinearExpr):
        return target.subst(sub)
    if isinstance(target, Constraint):
        return _subst(target, sub)
    if hasattr(target, "subst"):
        return target.subst(sub)
    raise TypeError(target)


# ---------------------------------------------------------------------------
# Printing


def sides(e: LinearExpr) -> Tuple[LinearExpr, LinearExpr]:
    """Split ``e`` (read as ``e rel 0``) into ``lhs rel rhs`` with positive terms."""
    pos = {v: a for v, a in e.coeffs if a > 0}
    negs = {v: -a for v, a in e.coeffs if a < 0}
    if pos:
        return LinearExpr.make(pos), LinearExpr.make(negs, -e.constant)
    return LinearExpr.make({}, e.constant), LinearExpr.make(negs)


def _fmt_atom(c: Constraint, negated: bool = False) -> str:
    if isinstance(c, Div):
        s = f"{c.modulus} | {c.expr}"
        return f"~({s})" if negated else s
    lhs, rhs = sides(c.expr)
    if isinstance(c, Le):
        return f"{lhs} <= {rhs}"
    return f"{lhs} {'!=' if negated else '='} {rhs}"


def format_constraint(c: Constraint, top: bool = True) -> str:
    if isinstance(c, Truth):
        return "true" if c.value else "false"
    if isinstance(c, _ATOMS):
        return _fmt_atom(c)
    if isinstance(c, Not):
        if isinstance(c.arg, (Eq, Div)):
            return _fmt_atom(c.arg, negated=True)
        return "~" + _paren(c.arg)
    if isinstance(c, And):
        return " /\\ ".join(_paren(a, allow=(Not,) + _ATOMS + (Truth,)) for a in c.args)
    if isinstance(c, Or):
        return " \\/ ".join(_paren(a, allow=(Not, And) + _ATOMS + (Truth,)) for a in c.args)
    if isinstance(c, (Exists, Forall)):
        q = "exists" if isinstance(c, Exists) else "forall"
        s = f"{q} {c.var}. {format_constraint(c.body)}"
        return s if top else f"({s})"
    raise TypeError(c)


def _paren(c: Constraint, allow=()) -> str:
    s = format_constraint(c, top=False)
    if isinstance(c, allow) or isinstance(c, (Exists, Forall)):
        return s
    if isinstance(c, Not) and not isinstance(c.arg, (Eq, Div)):
        return s
    return f"({s})"


# ---------------------------------------------------------------------------
# Evaluation


def _eval_qf(c: Constraint, env: Env) -> bool:
    if isinstance(c, Truth):
        return c.value
    if isinstance(c, Le):
        return c.expr.evaluate(env) <= 0
    if isinstance(c, Eq):
        return c.expr.evaluate(env) == 0
    if isinstance(c, Div):
        return c.expr.evaluate(env) % c.modulus == 0
    if isinstance(c, Not):
        return not _eval_qf(c.arg, env)
    if isinstance(c, And):
        return all(_eval_qf(a, env) for a in c.args)
    if isinstance(c, Or):
        return any(_eval_qf(a, env) for a in c.args)
    raise TypeError(c)


def evaluate(c: Constraint, ground: Env) -> bool:
    missing = free_vars(c) - set(ground)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    if not is_quantifier_free(c):
        c = eliminate_quantifiers(c)
    return _eval_qf(c, ground)


# ---------------------------------------------------------------------------
# NNF and DNF of quantifier-free constraints


def nnf(c: Constraint, positive: bool = True) -> Constraint:
    """Negation normal form of a quantifier-free constraint."""
    if isinstance(c, Truth):
        return c if positive else neg(c)
    if isinstance(c, _ATOMS):
        return c if positive else neg(c)
    if isinstance(c, Not):
        return nnf(c.arg, not positive)
    if isinstance(c, And):
        parts = [nnf(a, positive) for a in c.args]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(c, Or):
        parts = [nnf(a, positive) for a in c.args]
        return disj(*parts) if positive else conj(*parts)
    raise ValueError("nnf expects a quantifier-free constraint")


def _dnf(c: Constraint) -> List[List[Constraint]]:
    """Disjuncts of a QF NNF constraint as lists of literals."""
    if c == TRUE:
        return [[]]
    if c == FALSE:
        return []
    if isinstance(c, Or):
        out = []
        for a in c.args:
            out.extend(_dnf(a))
        return out
    if isinstance(c, And):
        acc: List[List[Constraint]] = [[]]
        for a in c.args:
            parts = _dnf(a)
            acc = [x + y for x in acc for y in parts]
            if not acc:
                return []
        return acc
    return [[c]]


# ---------------------------------------------------------------------------
# Conjunction solver over dict-encoded linear terms

# A term is (dict var->coef, constant).

def _t_sub(d: Dict[str, int], c: int, v: str, td: Mapping[str, int], tc: int):
    a = d.get(v, 0)
    if not a:
        return d, c
    d = dict(d)
    del d[v]
    for w, b in td.items():
        nb = d.get(w, 0) + a * b
        if nb:
            d[w] = nb
        else:
            d.pop(w, None)
    return d, c + a * tc


def _t_eval(d: Mapping[str, int], c: int, w: Dict[str, int]) -> int:
    return c + sum(a * w.get(v, 0) for v, a in d.items())


def _norm_le(d, c):
    if not d:
        return c <= 0
    g = 0
    for a in d.values():
        g = gcd(g, a)
    if g > 1:
        d = {v: a // g for v, a in d.items()}
        c = -((-c) // g)
    return (d, c)


def _norm_eq(d, c):
    if not d:
        return c == 0
    g = 0
    for a in d.values():
        g = gcd(g, a)
    if c % g:
        return False
    if g > 1:
        d = {v: a // g for v, a in d.items()}
        c //= g
    return (d, c)


def _norm_div(m, d, c):
    d = {v: a % m for v, a in d.items() if a % m}
    c %= m
    if not d:
        return c == 0
    return (m, d, c)


def _prep(eqs, les, divs):
    """Normalise; returns None when a ground atom fails."""
    E, L, D = [], [], []
    for d, c in eqs:
        r = _norm_eq(d, c)
        if r is False:
            return None
        if r is not True:
            E.append(r)
    for d, c in les:
        r = _norm_le(d, c)
        if r is False:
            return None
        if r is not True:
            L.append(r)
    for m, d, c in divs:
        r = _norm_div(m, d, c)
        if r is False:
            return None
        if r is not True:
            D.append(r)
    return E, L, D


def _closest(lo: Optional[int], hi: Optional[int]) -> int:
    if lo is not None and lo > 0:
        return lo
    if hi is not None and hi < 0:
        return hi
    return 0


def _fill(w: Dict[str, int], names: Iterable[str]) -> None:
    for v in names:
        w.setdefault(v, 0)


def _vars_of(eqs, les, divs) -> set:
    s = set()
    for d, _ in eqs:
        s.update(d)
    for d, _ in les:
        s.update(d)
    for _, d, _ in divs:
        s.update(d)
    return s


def _solve_core(eqs, les, divs) -> Optional[Dict[str, int]]:
    p = _prep(eqs, les, divs)
    if p is None:
        return None
    eqs, les, divs = p
    allvars = _vars_of(eqs, les, divs)
    if not allvars:
        return {}

    # unit equality: substitute
    for idx, (d, c) in enumerate(eqs):
        unit = next((v for v in sorted(d) if d[v] in (1, -1)), None)
        if unit is None:
            continue
        a = d[unit]
        td = {w: -b * a for w, b in d.items() if w != unit}
        tc = -c * a
        rest_e = [_t_sub(x, y, unit, td, tc) for j, (x, y) in enumerate(eqs) if j != idx]
        rest_l = [_t_sub(x, y, unit, td, tc) for x, y in les]
        rest_d = [(m,) + _t_sub(x, y, unit, td, tc) for m, x, y in divs]
        w = _solve_core(rest_e, rest_l, rest_d)
        if w is None:
            return None
        _fill(w, td)
        w[unit] = _t_eval(td, tc, w)
        _fill(w, allvars)
        return w

    if eqs:
        d, _ = eqs[0]
        v = min(sorted(d), key=lambda x: abs(d[x]))
        return _cooper_solve(v, eqs, les, divs, allvars)

    div_vars = set()
    for _, d, _ in divs:
        div_vars.update(d)

    best = None
    for v in sorted(allvars):
        lowers = [(d, c) for d, c in les if d.get(v, 0) < 0]
        uppers = [(d, c) for d, c in les if d.get(v, 0) > 0]
        in_div = v in div_vars
        if not in_div and (not lowers or not uppers):
            best = ("drop", v, 0)
            break
        exact = not in_div and all(
            -dl[v] == 1 or du[v] == 1 for dl, _ in lowers for du, _ in uppers
        )
        cost = len(lowers) * len(uppers) - len(lowers) - len(uppers)
        key = (0 if exact else 1, cost)
        if best is None or key < best[2]:
            best = ("fm" if exact else "cooper", v, key)

    kind, v = best[0], best[1]
    if kind == "cooper":
        return _cooper_solve(v, eqs, les, divs, allvars)

    lowers = [(d, c) for d, c in les if d.get(v, 0) < 0]
    uppers = [(d, c) for d, c in les if d.get(v, 0) > 0]
    rest = [(d, c) for d, c in les if v not in d]
    if kind == "fm":
        for dl, cl in lowers:
            a = -dl[v]
            for du, cu in uppers:
                b = du[v]
                nd: Dict[str, int] = {}
                for w_, x in dl.items():
                    if w_ != v:
                        nd[w_] = nd.get(w_, 0) + b * x
                for w_, x in du.items():
                    if w_ != v:
                        nd[w_] = nd.get(w_, 0) + a * x
                nd = {k: x for k, x in nd.items() if x}
                rest.append((nd, b * cl + a * cu))
    w = _solve_core([], rest, divs)
    if w is None:
        return None
    _fill(w, allvars - {v})
    lo = hi = None
    for dl, cl in lowers:
        a = -dl[v]
        r = _t_eval({k: x for k, x in dl.items() if k != v}, cl, w)
        b = -((-r) // a)  # ceil(r / a)
        lo = b if lo is None else max(lo, b)
    for du, cu in uppers:
        a = du[v]
        r = _t_eval({k: x for k, x in du.items() if k != v}, cu, w)
        b = (-r) // a
        hi = b if hi is None else min(hi, b)
    if lo is not None and hi is not None and lo > hi:
        return None  # cannot happen for exact shadows
    w[v] = _closest(lo, hi)
    return w


def _cooper_solve(v, eqs, les, divs, allvars) -> Optional[Dict[str, int]]:
    coefs = [abs(d[v]) for d, _ in eqs if v in d]
    coefs += [abs(d[v]) for d, _ in les if v in d]
    coefs += [abs(d[v]) for _, d, _ in divs if v in d]
    m = reduce(_lcm, coefs, 1)

    def scale(d, c, k):
        return {w: a * k for w, a in d.items()}, c * k

    E, L, D = [], [], []
    yE, yL, yD = [], [], []
    for d, c in eqs:
        if v in d:
            nd, nc = scale(d, c, m // abs(d[v]))
            nd[v] = 1 if nd[v] > 0 else -1
            yE.append((nd, nc))
        else:
            E.append((d, c))
    for d, c in les:
        if v in d:
            nd, nc = scale(d, c, m // abs(d[v]))
            nd[v] = 1 if nd[v] > 0 else -1
            yL.append((nd, nc))
        else:
            L.append((d, c))
    for mod, d, c in divs:
        if v in d:
            k = m // abs(d[v])
            nd, nc = scale(d, c, k)
            nd[v] = 1 if nd[v] > 0 else -1
            yD.append((mod * k, nd, nc))
        else:
            D.append((mod, d, c))
    if m > 1:
        yD.append((m, {v: 1}, 0))

    def attempt(td, tc):
        sE = E + [_t_sub(d, c, v, td, tc) for d, c in yE]
        sL = L + [_t_sub(d, c, v, td, tc) for d, c in yL]
        sD = D + [(mod,) + _t_sub(d, c, v, td, tc) for mod, d, c in yD]
        w = _solve_core(sE, sL, sD)
        if w is None:
            return None
        _fill(w, allvars - {v})
        y = _t_eval(td, tc, w)
        assert y % m == 0
        w[v] = y // m
        return w

    if yE:
        d, c = yE[0]
        s = d[v]
        td = {w: -a * s for w, a in d.items() if w != v}
        return attempt(td, -c * s)

    lowers = []
    uppers = []
    for d, c in yL:
        r = {w: a for w, a in d.items() if w != v}
        if d[v] < 0:
            lowers.append((r, c))  # y >= r + c
        else:
            uppers.append(({w: -a for w, a in r.items()}, -c))  # y <= -(r + c)
    period = 1
    for mod, d, _ in yD:
        period = _lcm(period, mod)
    if lowers and (not uppers or len(lowers) <= len(uppers)):
        for (td, tc), k in itertools.product(lowers, range(period)):
            w = attempt(td, tc + k)
            if w is not None:
                return w
        return None
    if uppers:
        for (td, tc), k in itertools.product(uppers, range(period)):
            w = attempt(td, tc - k)
            if w is not None:
                return w
        return None
    for k in range(period):
        w = attempt({}, k)
        if w is not None:
            return w
    return None


def _to_term(e: LinearExpr):
    return dict(e.coeffs), e.constant


def _solve_literals(lits: List[Constraint]) -> Optional[Dict[str, int]]:
    """Solve a conjunction of canonical literals (incl. negated Eq/Div)."""
    eqs, les, divs, neqs, ndivs = [], [], [], [], []
    for a in lits:
        if isinstance(a, Truth):
            if not a.value:
                return None
        elif isinstance(a, Le):
            les.append(_to_term(a.expr))
        elif isinstance(a, Eq):
            eqs.append(_to_term(a.expr))
        elif isinstance(a, Div):
            divs.append((a.modulus,) + _to_term(a.expr))
        elif isinstance(a, Not) and isinstance(a.arg, Eq):
            neqs.append(_to_term(a.arg.expr))
        elif isinstance(a, Not) and isinstance(a.arg, Div):
            ndivs.append((a.arg.modulus,) + _to_term(a.arg.expr))
        else:
            raise TypeError(a)
    return _solve_lazy(eqs, les, divs, neqs, ndivs)


def _solve_lazy(eqs, les, divs, neqs, ndivs):
    w = _solve_core(eqs, les, divs)
    if w is None:
        return None
    names = set()
    for d, _ in neqs:
        names.update(d)
    for _, d, _ in ndivs:
        names.update(d)
    _fill(w, names)
    for i, (d, c) in enumerate(neqs):
        if _t_eval(d, c, w) == 0:
            rest = neqs[:i] + neqs[i + 1:]
            r = _solve_lazy(eqs, les + [(d, c + 1)], divs, rest, ndivs)
            if r is not None:
                return r
            nd = {k: -a for k, a in d.items()}
            return _solve_lazy(eqs, les + [(nd, -c + 1)], divs, rest, ndivs)
    for i, (m, d, c) in enumerate(ndivs):
        if _t_eval(d, c, w) % m == 0:
            rest = ndivs[:i] + ndivs[i + 1:]
            for r_ in range(1, m):
                r = _solve_lazy(eqs, les, divs + [(m, d, c - r_)], neqs, rest)
                if r is not None:
                    return r
            return None
    return w


# ---------------------------------------------------------------------------
# Satisfiability of arbitrary constraints

_skolem_counter = itertools.count()


def _fresh_skolem(x: str) -> str:
    return f"{x}#{next(_skolem_counter)}"


def _qf_for_sat(c: Constraint, positive: bool) -> Constraint:
    """Equisatisfiable QF NNF; positive existentials become fresh free vars."""
    if isinstance(c, (Truth,) + _ATOMS):
        return c if positive else neg(c)
    if isinstance(c, Not):
        return _qf_for_sat(c.arg, not positive)
    if isinstance(c, And):
        parts = [_qf_for_sat(a, positive) for a in c.args]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(c, Or):
        parts = [_qf_for_sat(a, positive) for a in c.args]
        return disj(*parts) if positive else conj(*parts)
    if isinstance(c, (Exists, Forall)):
        existential = isinstance(c, Exists) == positive
        if existential:
            # skolemize a whole block of like quantifiers in one substitution
            kind = type(c)
            sub = {}
            while isinstance(c, kind):
                sub[c.var] = var(_fresh_skolem(c.var))
                c = c.body
            return _qf_for_sat(_subst(c, sub, check=False), positive)
        return nnf(eliminate_quantifiers(c), positive)
    raise TypeError(c)


def _eval_default(c: Constraint, w: Dict[str, int]) -> bool:
    if isinstance(c, Truth):
        return c.value
    if isinstance(c, (Le, Eq, Div)):
        v = _t_eval(dict(c.expr.coeffs), c.expr.constant, w)
        if isinstance(c, Le):
            return v <= 0
        if isinstance(c, Eq):
            return v == 0
        return v % c.modulus == 0
    if isinstance(c, Not):
        return not _eval_default(c.arg, w)
    if isinstance(c, And):
        return all(_eval_default(a, w) for a in c.args)
    if isinstance(c, Or):
        return any(_eval_default(a, w) for a in c.args)
    raise TypeError(c)


def _search(lits: List[Constraint], todo: List[Constraint]) -> Optional[Dict[str, int]]:
    lits = list(lits)
    todo = list(todo)
    ors: List[Constraint] = []
    while todo:
        f = todo.pop()
        if isinstance(f, Truth):
            if not f.value:
                return None
        elif isinstance(f, And):
            todo.extend(f.args)
        elif isinstance(f, Or):
            ors.append(f)
        else:
            lits.append(f)
    w = _solve_literals(lits)
    if w is None or not ors:
        return w
    pending = [o for o in ors if not _eval_default(o, w)]
    if not pending:
        return w
    first = pending[0]
    rest = [o for o in ors if o is not first]
    for branch in first.args:
        r = _search(lits, rest + [branch])
        if r is not None:
            return r
    return None


@lru_cache(maxsize=1 << 15)
def _model(c: Constraint) -> Optional[Tuple[Tuple[str, int], ...]]:
    qf = _qf_for_sat(c, True)
    w = _search([], [qf])
    if w is None:
        return None
    fv = free_vars(c)
    return tuple(sorted((v, w.get(v, 0)) for v in fv))


def satisfying_assignment(c: Constraint) -> Optional[Dict[str, int]]:
    """A witness for the free variables of ``c`` (values near 0), or None."""
    m = _model(c)
    return None if m is None else dict(m)


def is_satisfiable(c: Constraint) -> bool:
    return _model(c) is not None


def is_valid(c: Constraint) -> bool:
    return _model(neg(c)) is None


def entails(c1: Constraint, c2: Constraint) -> bool:
    return _model(conj(c1, neg(c2))) is None


def equivalent(c1: Constraint, c2: Constraint) -> bool:
    return entails(c1, c2) and entails(c2, c1)


# ---------------------------------------------------------------------------
# Quantifier elimination


def _split_lit(a: Constraint):
    """Classify a literal: kind, term, modulus."""
    if isinstance(a, Le):
        return "le", _to_term(a.expr), 0
    if isinstance(a, Eq):
        return "eq", _to_term(a.expr), 0
    if isinstance(a, Div):
        return "div", _to_term(a.expr), a.modulus
    if isinstance(a, Not) and isinstance(a.arg, Eq):
        return "ne", _to_term(a.arg.expr), 0
    if isinstance(a, Not) and isinstance(a.arg, Div):
        return "ndiv", _to_term(a.arg.expr), a.arg.modulus
    raise TypeError(a)


def _mk(kind, d, c, m=0) -> Constraint:
    e = LinearExpr.make(d, c)
    if kind == "le":
        return mk_le(e)
    if kind == "eq":
        return mk_eq(e)
    if kind == "div":
        return mk_div(m, e)
    if kind == "ne":
        return neg(mk_eq(e))
    if kind == "ndiv":
        return neg(mk_div(m, e))
    raise ValueError(kind)


def _project_conj(x: str, lits: List[Constraint]) -> List[List[Constraint]]:
    """Eliminate ``x`` from a conjunction of literals, giving disjuncts."""
    others: List[Constraint] = []
    eqs, les, divs = [], [], []
    for a in lits:
        if isinstance(a, Truth):
            if not a.value:
                return []
            continue
        kind, (d, c), m = _split_lit(a)
        if x not in d:
            others.append(a)
            continue
        if kind == "ne":
            rest = [b for b in lits if b is not a]
            nd = {k: -v for k, v in d.items()}
            out = _project_conj(x, rest + [_mk("le", d, c + 1)])
            out += _project_conj(x, rest + [_mk("le", nd, -c + 1)])
            return out
        if kind == "ndiv":
            rest = [b for b in lits if b is not a]
            out = []
            for r in range(1, m):
                out += _project_conj(x, rest + [_mk("div", d, c - r, m)])
            return out
        if kind == "eq":
            eqs.append((d, c))
        elif kind == "le":
            les.append((d, c))
        else:
            divs.append((m, d, c))

    def finish(extra_eqs, extra_les, extra_divs):
        res = list(others)
        for d, c in extra_eqs:
            res.append(_mk("eq", d, c))
        for d, c in extra_les:
            res.append(_mk("le", d, c))
        for m, d, c in extra_divs:
            res.append(_mk("div", d, c, m))
        if any(r == FALSE for r in res):
            return None
        return [r for r in res if r != TRUE]

    # unit equality
    for idx, (d, c) in enumerate(eqs):
        a = d[x]
        if a in (1, -1):
            td = {w: -b * a for w, b in d.items() if w != x}
            tc = -c * a
            r = finish(
                [_t_sub(p, q, x, td, tc) for j, (p, q) in enumerate(eqs) if j != idx],
                [_t_sub(p, q, x, td, tc) for p, q in les],
                [(m,) + _t_sub(p, q, x, td, tc) for m, p, q in divs],
            )
            return [] if r is None else [r]

    if not eqs and not divs:
        lowers = [(d, c) for d, c in les if d[x] < 0]
        uppers = [(d, c) for d, c in les if d[x] > 0]
        if not lowers or not uppers:
            return [list(others)]
        if all(-dl[x] == 1 or du[x] == 1 for dl, _ in lowers for du, _ in uppers):
            combos = []
            for dl, cl in lowers:
                a = -dl[x]
                for du, cu in uppers:
                    b = du[x]
                    nd: Dict[str, int] = {}
                    for w_, q in dl.items():
                        if w_ != x:
                            nd[w_] = nd.get(w_, 0) + b * q
                    for w_, q in du.items():
                        if w_ != x:
                            nd[w_] = nd.get(w_, 0) + a * q
                    combos.append(({k: q for k, q in nd.items() if q}, b * cl + a * cu))
            r = finish([], combos, [])
            return [] if r is None else [r]

    # Cooper
    coefs = [abs(d[x]) for d, _ in eqs] + [abs(d[x]) for d, _ in les] + [abs(d[x]) for _, d, _ in divs]
    m = reduce(_lcm, coefs, 1)
    yE, yL, yD = [], [], []
    for d, c in eqs:
        k = m // abs(d[x])
        nd = {w: a * k for w, a in d.items()}
        nd[x] = 1 if nd[x] > 0 else -1
        yE.append((nd, c * k))
    for d, c in les:
        k = m // abs(d[x])
        nd = {w: a * k for w, a in d.items()}
        nd[x] = 1 if nd[x] > 0 else -1
        yL.append((nd, c * k))
    for mod, d, c in divs:
        k = m // abs(d[x])
        nd = {w: a * k for w, a in d.items()}
        nd[x] = 1 if nd[x] > 0 else -1
        yD.append((mod * k, nd, c * k))
    if m > 1:
        yD.append((m, {x: 1}, 0))

    def inst(td, tc):
        return finish(
            [_t_sub(p, q, x, td, tc) for p, q in yE],
            [_t_sub(p, q, x, td, tc) for p, q in yL],
            [(mm,) + _t_sub(p, q, x, td, tc) for mm, p, q in yD],
        )

    out = []
    if yE:
        d, c = yE[0]
        s = d[x]
        r = inst({w: -a * s for w, a in d.items() if w != x}, -c * s)
        return [] if r is None else [r]
    lowers, uppers = [], []
    for d, c in yL:
        rd = {w: a for w, a in d.items() if w != x}
        if d[x] < 0:
            lowers.append((rd, c))
        else:
            uppers.append(({w: -a for w, a in rd.items()}, -c))
    period = 1
    for mod, _, _ in yD:
        period = _lcm(period, mod)
    if lowers and (not uppers or len(lowers) <= len(uppers)):
        cands = [(td, tc + k) for (td, tc) in lowers for k in range(period)]
    elif uppers:
        cands = [(td, tc - k) for (td, tc) in uppers for k in range(period)]
    else:
        cands = [({}, k) for k in range(period)]
    for td, tc in cands:
        r = inst(td, tc)
        if r is not None:
            out.append(r)
    return out


def _simplify_dnf(disjuncts: List[List[Constraint]]) -> Constraint:
    kept: List[frozenset] = []
    order: List[List[Constraint]] = []
    for lits in disjuncts:
        uniq = list(dict.fromkeys(lits))
        if _solve_literals(uniq) is None:
            continue
        s = frozenset(uniq)
        if any(k <= s for k in kept):
            continue
        idx = [i for i, k in enumerate(kept) if s <= k]
        for i in reversed(idx):
            del kept[i]
            del order[i]
        kept.append(s)
        order.append(uniq)
    return disj(*(conj(*lits) for lits in order))


def _project(x: str, qf: Constraint) -> Constraint:
    out: List[List[Constraint]] = []
    for lits in _dnf(nnf(qf)):
        out.extend(_project_conj(x, lits))
    return _simplify_dnf(out)


def _substitute_unit_eq(x: str, body: Constraint) -> Optional[Constraint]:
    """``exists x. (x = t /\\ rest)`` is ``rest[t/x]`` when x has coefficient 1 or -1."""
    for a in conjuncts(body):
        if isinstance(a, Eq) and abs(a.expr.coeff(x)) == 1:
            k = a.expr.coeff(x)
            t = -(a.expr - var(x) * k) * k
            rest = [b for b in conjuncts(body) if b is not a]
            return conj(*(apply_subst(b, {x: t}) for b in rest))
    return None


@lru_cache(maxsize=1 << 14)
def eliminate_quantifiers(c: Constraint) -> Constraint:
    """An equivalent quantifier-free constraint (may contain ``m | e`` atoms)."""
    if isinstance(c, (Truth,) + _ATOMS):
        return c
    if isinstance(c, Not):
        return nnf(eliminate_quantifiers(c.arg), False)
    if isinstance(c, And):
        return conj(*(eliminate_quantifiers(a) for a in c.args))
    if isinstance(c, Or):
        return disj(*(eliminate_quantifiers(a) for a in c.args))
    if isinstance(c, Exists):
        body = eliminate_quantifiers(c.body)
        fast = _substitute_unit_eq(c.var, body)
        if fast is not None:
            return fast
        return _project(c.var, body)
    if isinstance(c, Forall):
        inner = _project(c.var, nnf(eliminate_quantifiers(c.body), False))
        return nnf(inner, False)
    raise TypeError(c)


# ---------------------------------------------------------------------------
# Domains


def _has_bounds(x: str, lits: List[Constraint]) -> bool:
    lo = hi = False
    for a in lits:
        if isinstance(a, Eq) and a.expr.coeff(x):
            return True
        if isinstance(a, Le):
            k = a.expr.coeff(x)
            lo |= k < 0
            hi |= k > 0
    return lo and hi


@lru_cache(maxsize=20_000)
def encloses(c: Constraint, x: str) -> bool:
    """True iff every valuation of the other variables admits finitely many x."""
    if x not in free_vars(c):
        return False
    qf = nnf(eliminate_quantifiers(c)) if not is_quantifier_free(c) else nnf(c)
    if all(_has_bounds(x, lits) for lits in _dnf(qf)):
        return True
    y1, y2 = "lo#", "hi#"
    escape = conj(c, disj(lt(x, y1), gt(x, y2)))
    bad = forall(y1, forall(y2, exists(x, escape)))
    return not is_satisfiable(bad)


def _univariate_range(x: str, lits: List[Constraint]) -> List[int]:
    lo = hi = None
    rest = []
    for a in lits:
        if isinstance(a, (Le, Eq)):
            k = a.expr.coeff(x)
            c = a.expr.constant
            if isinstance(a, Eq):
                if c % k:
                    return []
                v = -c // k
                lo = v if lo is None else max(lo, v)
                hi = v if hi is None else min(hi, v)
            elif k > 0:
                b = (-c) // k
                hi = b if hi is None else min(hi, b)
            else:
                b = -((-c) // (-k))  # x >= ceil(c / -k)
                lo = b if lo is None else max(lo, b)
        else:
            rest.append(a)
    if lo is None or hi is None:
        raise NotEnclosedError(x)
    return [v for v in range(lo, hi + 1) if all(_eval_qf(a, {x: v}) for a in rest)]


@lru_cache(maxsize=1 << 16)
def _range_cached(c: Constraint, x: str, env: Tuple[Tuple[str, int], ...]) -> Tuple[int, ...]:
    g = _subst(c, {k: const(v) for k, v in env}, check=False)
    if not is_quantifier_free(g):
        g = eliminate_quantifiers(g)
    g = nnf(g)
    if g == FALSE:
        return ()
    if x not in free_vars(g):
        if g == TRUE:
            raise NotEnclosedError(x)
        return ()
    vals = set()
    for lits in _dnf(g):
        vals.update(_univariate_range(x, lits))
    return tuple(sorted(vals))


def solution_range(c: Constraint, x: str, env: Env) -> List[int]:
    """Sorted integers v with ``c[v/x]`` true under ``env``."""
    fv = free_vars(c) - {x}
    missing = fv - set(env)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    key = tuple(sorted((k, env[k]) for k in fv))
    return list(_range_cached(c, x, key))


def frame_bounds(c: Constraint, x: str) -> Optional[Tuple[LinearExpr, LinearExpr]]:
    """Return (lo, hi) when ``c`` is syntactically the frame ``lo <= x <= hi``."""
    if not (isinstance(c, And) and len(c.args) == 2):
        return None
    a, b = c.args
    if not (isinstance(a, Le) and isinstance(b, Le)):
        return None
    if a.expr.coeff(x) != -1 or b.expr.coeff(x) != 1:
        return None
    lo = a.expr + var(x)  # lo - x <= 0
    hi = -(b.expr - var(x))  # x - hi <= 0
    if x in lo.variables or x in hi.variables:
        return None
    if frame(x, lo, hi) != c:
        return None
    return lo, hi
