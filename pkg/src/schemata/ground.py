"""Ground propositional formulas and a small DPLL solver."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple, Union


@dataclass(frozen=True)
class PConst:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


PTRUE = PConst(True)
PFALSE = PConst(False)


@dataclass(frozen=True)
class PLit:
    name: str
    positive: bool = True

    def __str__(self):
        return self.name if self.positive else "~" + self.name


@dataclass(frozen=True)
class PAnd:
    args: Tuple["PropFormula", ...]

    def __str__(self):
        return "(" + " /\\ ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class POr:
    args: Tuple["PropFormula", ...]

    def __str__(self):
        return "(" + " \\/ ".join(map(str, self.args)) + ")"


PropFormula = Union[PConst, PLit, PAnd, POr]
PropModel = Dict[str, bool]


def pand(args: Iterable[PropFormula]) -> PropFormula:
    """Conjunction dropping neutral ``true`` (occurrences are never absorbed)."""
    out: List[PropFormula] = []
    for a in args:
        if isinstance(a, PAnd):
            out.extend(a.args)
        elif a != PTRUE:
            out.append(a)
    if not out:
        return PTRUE
    return out[0] if len(out) == 1 else PAnd(tuple(out))


def por(args: Iterable[PropFormula]) -> PropFormula:
    out: List[PropFormula] = []
    for a in args:
        if isinstance(a, POr):
            out.extend(a.args)
        elif a != PFALSE:
            out.append(a)
    if not out:
        return PFALSE
    return out[0] if len(out) == 1 else POr(tuple(out))


def pneg(f: PropFormula) -> PropFormula:
    if isinstance(f, PConst):
        return PConst(not f.value)
    if isinstance(f, PLit):
        return PLit(f.name, not f.positive)
    if isinstance(f, PAnd):
        return POr(tuple(pneg(a) for a in f.args))
    return PAnd(tuple(pneg(a) for a in f.args))


def evaluate_prop(f: PropFormula, model: PropModel) -> bool:
    if isinstance(f, PConst):
        return f.value
    if isinstance(f, PLit):
        return model.get(f.name, False) == f.positive
    if isinstance(f, PAnd):
        return all(evaluate_prop(a, model) for a in f.args)
    return any(evaluate_prop(a, model) for a in f.args)


def atoms_of(f: PropFormula) -> List[str]:
    seen: Dict[str, None] = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, PLit):
            seen.setdefault(g.name)
        elif isinstance(g, (PAnd, POr)):
            stack.extend(reversed(g.args))
    return list(seen)


def literals_of(f: PropFormula) -> List[PLit]:
    out: Dict[PLit, None] = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, PLit):
            out.setdefault(g)
        elif isinstance(g, (PAnd, POr)):
            stack.extend(reversed(g.args))
    return list(out)


# ---------------------------------------------------------------------------
# CNF


class CNF:
    """Clauses over integer variables; atoms come first, Tseitin vars after."""

    def __init__(self) -> None:
        self.atom_ids: Dict[str, int] = {}
        self.nvars = 0
        self.clauses: List[List[int]] = []

    def atom(self, name: str) -> int:
        v = self.atom_ids.get(name)
        if v is None:
            self.nvars += 1
            v = self.atom_ids[name] = self.nvars
        return v

    def fresh(self) -> int:
        self.nvars += 1
        return self.nvars


def to_cnf(f: PropFormula) -> CNF:
    """Plaisted-Greenbaum encoding of an NNF formula."""
    cnf = CNF()
    for a in atoms_of(f):
        cnf.atom(a)

    def lit_of(g: PropFormula) -> int:
        # returns a literal implying g
        if isinstance(g, PLit):
            v = cnf.atom(g.name)
            return v if g.positive else -v
        d = cnf.fresh()
        if isinstance(g, PAnd):
            for a in g.args:
                if a == PTRUE:
                    continue
                if a == PFALSE:
                    cnf.clauses.append([-d])
                    continue
                cnf.clauses.append([-d, lit_of(a)])
        else:
            clause = [-d]
            for a in g.args:
                if a == PTRUE:
                    return d  # d may be true freely
                if a == PFALSE:
                    continue
                clause.append(lit_of(a))
            cnf.clauses.append(clause)
        return d

    def assert_(g: PropFormula) -> None:
        if g == PTRUE:
            return
        if g == PFALSE:
            cnf.clauses.append([])
        elif isinstance(g, PLit):
            cnf.clauses.append([lit_of(g)])
        elif isinstance(g, PAnd):
            for a in g.args:
                assert_(a)
        else:
            clause = []
            for a in g.args:
                if a == PTRUE:
                    return
                if a == PFALSE:
                    continue
                clause.append(lit_of(a))
            cnf.clauses.append(clause)

    assert_(f)
    return cnf


def dpll(nvars: int, clauses: List[List[int]]) -> Optional[List[bool]]:
    """DPLL with two watched literals and chronological backtracking."""
    clauses = [list(dict.fromkeys(c)) for c in clauses]
    clauses = [c for c in clauses if not any(-l in c for l in c)]
    if any(not c for c in clauses):
        return None
    assign: List[int] = [0] * (nvars + 1)  # 0 unassigned, 1 true, -1 false
    watches: Dict[int, List[int]] = {}
    units: List[int] = []
    for i, c in enumerate(clauses):
        if len(c) == 1:
            units.append(c[0])
        else:
            watches.setdefault(c[0], []).append(i)
            watches.setdefault(c[1], []).append(i)

    def value(l: int) -> int:
        a = assign[abs(l)]
        return a if l > 0 else -a

    trail: List[int] = []
    # (trail length at decision, decision literal, flipped?)
    decisions: List[Tuple[int, int, bool]] = []

    def enqueue(l: int) -> bool:
        v = value(l)
        if v == 1:
            return True
        if v == -1:
            return False
        assign[abs(l)] = 1 if l > 0 else -1
        trail.append(l)
        return True

    def propagate(start: int) -> bool:
        i = start
        while i < len(trail):
            l = -trail[i]  # literal that became false
            i += 1
            ws = watches.get(l)
            if not ws:
                continue
            keep = []
            j = 0
            conflict = False
            while j < len(ws):
                ci = ws[j]
                j += 1
                c = clauses[ci]
                if c[0] == l:
                    c[0], c[1] = c[1], c[0]
                if value(c[0]) == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if not enqueue(c[0]):
                        conflict = True
                        keep.extend(ws[j:])
                        break
            watches[l] = keep
            if conflict:
                return False
        return True

    for u in units:
        if not enqueue(u):
            return None
    if not propagate(0):
        return None

    occurrence: Dict[int, int] = {}
    for c in clauses:
        for l in c:
            occurrence[abs(l)] = occurrence.get(abs(l), 0) + 1
    order = sorted(range(1, nvars + 1), key=lambda v: -occurrence.get(v, 0))

    while True:
        var = next((v for v in order if assign[v] == 0), None)
        if var is None:
            return [False] + [a == 1 for a in assign[1:]]
        decisions.append((len(trail), var, False))
        enqueue(var)
        ok = propagate(len(trail) - 1)
        while not ok:
            # backtrack to the most recent unflipped decision
            while decisions and decisions[-1][2]:
                decisions.pop()
            if not decisions:
                return None
            pos, dv, _ = decisions.pop()
            for l in trail[pos:]:
                assign[abs(l)] = 0
            del trail[pos:]
            decisions.append((pos, dv, True))
            enqueue(-dv)
            ok = propagate(len(trail) - 1)


def solve_prop(f: PropFormula) -> Optional[PropModel]:
    """A model over the atoms of ``f``, or None when unsatisfiable."""
    cnf = to_cnf(f)
    res = dpll(cnf.nvars, cnf.clauses)
    if res is None:
        return None
    return {name: res[v] for name, v in cnf.atom_ids.items()}


def to_dimacs(f: PropFormula) -> str:
    cnf = to_cnf(f)
    lines = [f"c {name} {v}" for name, v in cnf.atom_ids.items()]
    lines.append(f"p cnf {cnf.nvars} {len(cnf.clauses)}")
    lines.extend(" ".join(map(str, c + [0])) for c in cnf.clauses)
    return "\n".join(lines) + "\n"
