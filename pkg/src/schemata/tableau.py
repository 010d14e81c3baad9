"""Tableau construction, verdicts and model extraction."""
from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

from . import linarith as la
from .ground import PropModel, evaluate_prop, pand, solve_prop
from .looping import LoopCertificate, Normal, eq_up_to_shift, normalize, signature
from .rules import (
    Application,
    State,
    rule_algebraic,
    rule_constraintsplit,
    rule_emptiness,
    rule_instantiate,
    rule_instantiate_frames,
    rule_intervalise,
    rule_propsimpl,
    rule_propsplit,
    simplify_constraint,
)
from .schema import BOTTOM, TOP, Pattern, Schema, intern_pattern, mk_and, realize, satisfying_envs


class SoundnessError(RuntimeError):
    """An internal consistency check failed."""


@dataclass
class Node:
    id: int
    state: State
    parent: Optional[int] = None
    depth: int = 0
    phase: int = 1  # strategy step; 0 means general rules
    children: List[int] = field(default_factory=list)
    application: Optional[Application] = None
    status: str = "open"  # open | closed | loop | sat | stuck
    certificate: Optional[LoopCertificate] = None
    normal: Optional[Normal] = None
    alignment: bool = False

    @property
    def rule(self) -> Optional[str]:
        return self.application.rule if self.application else None

    def schema(self) -> Schema:
        return self.state.schema()


@dataclass
class Tableau:
    root: Schema
    nodes: List[Node] = field(default_factory=list)

    @property
    def loops(self) -> List[LoopCertificate]:
        return [n.certificate for n in self.nodes if n.certificate is not None]

    def ancestors(self, i: int) -> Iterator[int]:
        p = self.nodes[i].parent
        while p is not None:
            yield p
            p = self.nodes[p].parent

    def leaves(self) -> List[Node]:
        return [n for n in self.nodes if not n.children]

    def rule_log(self) -> List[Tuple[int, str, List[int]]]:
        return [(n.id, n.rule, list(n.children)) for n in self.nodes if n.application]

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for n in self.nodes:
            if n.application:
                out[n.rule] = out.get(n.rule, 0) + 1
        return out


@dataclass
class Unsat:
    tableau: Tableau

    def line(self) -> str:
        return "VERDICT: UNSAT"


@dataclass
class Sat:
    env: Dict[str, int]
    model: PropModel
    tableau: Tableau

    def line(self) -> str:
        env = ",".join(f"{k}={v}" for k, v in sorted(self.env.items()))
        if len(self.env) == 1:
            env = str(next(iter(self.env.values())))
        return f"VERDICT: SAT n={env}"


@dataclass
class Unknown:
    reason: str
    tableau: Optional[Tableau] = None

    def line(self) -> str:
        return f"VERDICT: UNKNOWN {self.reason}"


@dataclass
class UnsatUpTo:
    n_max: int

    def line(self) -> str:
        return f"VERDICT: UNKNOWN unsat-up-to {self.n_max}"


Verdict = Union[Unsat, Sat, Unknown]


# ---------------------------------------------------------------------------
# Models


def extract_model(root: Schema, leaf: State) -> Tuple[Dict[str, int], PropModel]:
    """Environment from the leaf constraint and a verified model of the root realization."""
    w = la.satisfying_assignment(leaf.constraint)
    if w is None:
        raise SoundnessError("sat leaf with unsatisfiable constraint")
    env = {p: w.get(p, 0) for p in root.parameters}
    f = realize(root, env)
    model = solve_prop(f)
    if model is None or not evaluate_prop(f, model):
        raise SoundnessError(f"leaf reported satisfiable but the realization at {env} is not")
    return env, model


# ---------------------------------------------------------------------------
# Driver

GENERAL_ORDER: Tuple[Tuple[str, Callable[[State], Optional[Application]]], ...] = (
    ("algebraic", rule_algebraic),
    ("propsimpl", rule_propsimpl),
    ("propsplit", rule_propsplit),
    ("constraintsplit", rule_constraintsplit),
    ("intervalise", rule_intervalise),
    ("emptiness", rule_emptiness),
    ("instantiate", rule_instantiate),
)


@dataclass
class Options:
    budget: int = 100_000
    time_limit: Optional[float] = None
    strategy: bool = False
    allow_emptiness: bool = True
    allow_intervalise: bool = True
    loop_everywhere: bool = False
    loop_scope: str = "all"  # or "ancestors"


class Prover:
    def __init__(self, schema: Schema, options: Options):
        self.schema = schema
        self.opt = options
        self.params = tuple(schema.parameters)
        self.tab = Tableau(schema)
        self.index: Dict[Tuple, List[int]] = {}
        self.queue: deque = deque()
        self.stuck = False
        self.shared: Dict[Pattern, Pattern] = {}

    # bookkeeping
    def _new(self, st: State, parent: Optional[Node], phase: int, alignment: bool = False) -> Node:
        # sibling states mostly repeat their parent's subtrees; store those once
        pat = intern_pattern(st.pattern, self.shared)
        lits = tuple(intern_pattern(L, self.shared) for L in st.lits)
        st = State(pat, st.constraint, lits, st.params)
        n = Node(len(self.tab.nodes), st, parent.id if parent else None,
                 parent.depth + 1 if parent else 0, phase, alignment=alignment)
        self.tab.nodes.append(n)
        if parent:
            parent.children.append(n.id)
        return n

    def _apply(self, node: Node, app: Application, phase: int, alignment: bool = False) -> None:
        node.application = app
        for st in app.children:
            child = self._new(st, node, phase, alignment)
            self.queue.append(child.id)

    # looping
    def _bounded(self, C: la.Constraint) -> bool:
        if not self.params:
            return True
        for p in self.params:
            others = [q for q in self.params if q != p]
            if not la.encloses(la.exists_many(others, C), p):
                return False
        return True

    def _check_loop(self, node: Node) -> bool:
        st = node.state
        # finitely many environments: the ordinary rules close the branch
        if not self.opt.loop_everywhere and self._bounded(st.constraint):
            return False
        if node.normal is None:
            node.normal = normalize(mk_and(st.pattern, *st.lits), st.constraint, self.params)
        if node.normal.pattern() == BOTTOM or la.FALSE in node.normal.constraint:
            node.status = "closed"
            return True
        ancestors = set(self.tab.ancestors(node.id))
        for p in self.params:
            key = (p, signature(node.normal, p))
            cands = self.index.get(key, [])
            ordered = sorted(
                cands,
                key=lambda c: (c not in ancestors, not self.tab.nodes[c].alignment, -c),
            )
            for c in ordered:
                if c == node.id:
                    continue
                if self.opt.loop_scope == "ancestors" and c not in ancestors:
                    break
                r = eq_up_to_shift(node.normal, self.tab.nodes[c].normal, p)
                if r is not None:
                    node.status = "loop"
                    node.certificate = LoopCertificate(node.id, c, r[1], r[0])
                    return True
        for p in self.params:
            key = (p, signature(node.normal, p))
            lst = self.index.setdefault(key, [])
            if node.id not in lst:
                lst.append(node.id)
        return False

    # expansion
    def _general(self, node: Node) -> bool:
        for name, rule in GENERAL_ORDER:
            if name == "emptiness" and not self.opt.allow_emptiness:
                continue
            if name == "intervalise" and not self.opt.allow_intervalise:
                continue
            app = rule(node.state)
            if app is not None:
                self._apply(node, app, 0)
                return True
        return False

    def _strategy(self, node: Node) -> bool:
        phase = node.phase
        entered = node.parent is None or self.tab.nodes[node.parent].phase != phase or node.alignment
        for _ in range(3):
            if entered and self._check_loop(node):
                return True
            st = node.state
            if phase == 1:
                app = rule_constraintsplit(st, framed=True)
                if app:
                    self._apply(node, app, 1)
                    return True
            elif phase == 2:
                app = (
                    rule_algebraic(st)
                    or rule_propsimpl(st, param_only=True)
                    or rule_propsplit(st)
                    or rule_constraintsplit(st, framed=False)
                    or (self.opt.allow_intervalise and rule_intervalise(st))
                    or (self.opt.allow_emptiness and rule_emptiness(st))
                    or None
                )
                if app:
                    self._apply(node, app, 2)
                    return True
            else:
                app = rule_instantiate_frames(st)
                if app:
                    self._apply(node, app, 1, alignment=True)
                    return True
            phase = phase % 3 + 1
            node.phase = phase
            entered = True
        return False

    def _expand(self, node: Node) -> Optional[Verdict]:
        st = node.state
        if st.is_closed():
            node.status = "closed"
            return None
        if st.pattern == TOP:
            node.status = "sat"
            env, model = extract_model(self.schema, st)
            return Sat(env, model, self.tab)
        if self.opt.strategy and node.phase > 0:
            if self._strategy(node):
                return None
            node.phase = 0
        elif self._check_loop(node):
            return None
        if not self._general(node):
            node.status = "stuck"
            self.stuck = True
        return None

    def run(self) -> Verdict:
        start = time.monotonic()
        root_state = State(self.schema.pattern, simplify_constraint(self.schema.constraint), (), self.params)
        root = self._new(root_state, None, 1)
        self.queue.append(root.id)
        while self.queue:
            if len(self.tab.nodes) > self.opt.budget:
                return Unknown("budget", self.tab)
            if self.opt.time_limit is not None and time.monotonic() - start > self.opt.time_limit:
                return Unknown("timeout", self.tab)
            node = self.tab.nodes[self.queue.popleft()]
            v = self._expand(node)
            if v is not None:
                return v
        if self.stuck:
            return Unknown("no-loop-found", self.tab)
        return Unsat(self.tab)


def fair_solve(schema: Schema, budget: int = 100_000, time_limit: Optional[float] = None) -> Verdict:
    """Breadth-first SchDP with looping attempted before the expansion rules."""
    return Prover(schema, Options(budget=budget, time_limit=time_limit)).run()


# ---------------------------------------------------------------------------
# Baseline and oracles


def enumerate_baseline(schema: Schema, n_max: int) -> Union[Sat, UnsatUpTo]:
    """Ground every environment with parameters in [0..n_max]; least satisfiable one wins."""
    params = list(schema.parameters)
    envs = sorted(satisfying_envs(schema.constraint, params, n_max), key=lambda e: (sum(e.values()), tuple(e[p] for p in params)))
    for env in envs:
        f = realize(schema, env)
        m = solve_prop(f)
        if m is not None:
            return Sat(env, m, Tableau(schema))
    return UnsatUpTo(n_max)


def node_formula(st: State, env: Dict[str, int]):
    return realize(st.schema(), env)


def local_soundness_violations(tab: Tableau, max_param: int = 8, samples: int = 20,
                               seed: int = 0) -> List[Tuple[int, Dict[str, int]]]:
    """Nodes whose satisfiability differs from the disjunction of their children's.

    Checked at ``samples`` environments drawn from [0..max_param]; all of them if fewer exist.
    """
    params = list(tab.root.parameters)
    envs = list(satisfying_envs(la.TRUE, params, max_param)) if params else [{}]
    if len(envs) > samples:
        envs = random.Random(seed).sample(envs, samples)
    cache: Dict[Tuple[int, Tuple], bool] = {}

    def sat(i: int, env: Dict[str, int]) -> bool:
        key = (i, tuple(sorted(env.items())))
        if key not in cache:
            cache[key] = solve_prop(node_formula(tab.nodes[i].state, env)) is not None
        return cache[key]

    bad = []
    for n in tab.nodes:
        if not n.children:
            continue
        for env in envs:
            if sat(n.id, env) != any(sat(c, env) for c in n.children):
                bad.append((n.id, env))
                break
    return bad


def loop_certificate_violations(tab: Tableau, n_range=range(1, 9)) -> List[Tuple[LoopCertificate, int]]:
    """Certificates where the bud is satisfiable at n but the companion is not at n - k."""
    bad = []
    for cert in tab.loops:
        bud = tab.nodes[cert.bud].state
        comp = tab.nodes[cert.companion].state
        for n in n_range:
            env = {p: 0 for p in tab.root.parameters}
            env[cert.parameter] = n
            if n - cert.shift < 0:
                continue
            if solve_prop(node_formula(bud, env)) is None:
                continue
            env2 = dict(env)
            env2[cert.parameter] = n - cert.shift
            if solve_prop(node_formula(comp, env2)) is None:
                bad.append((cert, n))
                break
    return bad
