"""Regularly nested schemata: the class checker and the strategy driver."""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from . import linarith as la
from .linarith import LinearExpr
from .looping import NOT_ARITHMETIC, deviation
from .rules import pctx, tidy_domain
from .schema import Iter, Lit, Schema, all_vars, walk
from .tableau import Node, Options, Prover, Verdict

Frame = Tuple[LinearExpr, LinearExpr]


@dataclass
class ClassReport:
    monadic: bool
    framed: bool
    aligned: Optional[Tuple[int, int]]
    arithmetic: bool
    single_parameter: bool
    regularly_nested: bool
    relaxed_shapes: Dict[str, bool] = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["aligned"] = list(self.aligned) if self.aligned else None
        return json.dumps(d, sort_keys=True)


def frames_of(s: Schema) -> Optional[List[Tuple[str, Frame]]]:
    """Frame of every iteration, or None if some iteration is not framed."""
    out = []
    for _, node, enc in walk(s.pattern):
        if not isinstance(node, Iter):
            continue
        fb = la.frame_bounds(node.domain, node.var)
        if fb is None:
            ctx = pctx(s.constraint, enc)
            fb = la.frame_bounds(tidy_domain(node.domain, node.var, ctx), node.var)
        if fb is None:
            return None
        out.append((node.var, fb))
    return out


def _const(e: LinearExpr) -> Optional[int]:
    return e.constant if e.is_ground() else None


def _param_minus(e: LinearExpr, param: Optional[str]) -> Optional[int]:
    """l when e is exactly ``param - l``."""
    if param is None or e.coeffs != ((param, 1),):
        return None
    return -e.constant


def _var_plus(e: LinearExpr, bound: set) -> Optional[Tuple[str, int]]:
    if len(e.coeffs) == 1 and e.coeffs[0][1] == 1 and e.coeffs[0][0] in bound:
        return e.coeffs[0][0], e.constant
    return None


def _relaxed(frames: Optional[List[Tuple[str, Frame]]], param: Optional[str], bound: set) -> Dict[str, bool]:
    flags = dict.fromkeys(("down_aligned", "up_aligned", "broadly_aligned", "variable_aligned"), False)
    if frames is None or param is None:
        return flags
    lows = [_const(lo) for _, (lo, _) in frames]
    highs = [_param_minus(hi, param) for _, (_, hi) in frames]
    consts = all(k is not None for k in lows)
    param_hi = all(l is not None for l in highs)
    flags["broadly_aligned"] = consts and param_hi
    flags["down_aligned"] = flags["broadly_aligned"] and len(set(lows)) <= 1
    flags["up_aligned"] = flags["broadly_aligned"] and len(set(highs)) <= 1
    # one common lower bound; upper bounds are a common param - l or x + q
    if len({str(lo) for _, (lo, _) in frames}) <= 1:
        tops = set()
        ok = True
        for _, (_, hi) in frames:
            if _var_plus(hi, bound) is not None:
                continue
            if param in hi.variables:
                tops.add(hi)
            else:
                ok = False
        flags["variable_aligned"] = ok and len(tops) <= 1
    return flags


def classify(s: Schema) -> ClassReport:
    params = list(s.parameters)
    lits = [n for _, n, _ in walk(s.pattern) if isinstance(n, Lit)]
    # propositional variables without an index do not break monadicity
    monadic = all(len(L.indices) <= 1 for L in lits)
    single = len(params) == 1
    param = params[0] if single else None
    frames = frames_of(s)
    framed = frames is not None
    aligned = None
    if framed and frames:
        shapes = {(_const(lo), _param_minus(hi, param)) for _, (lo, hi) in frames}
        if len(shapes) == 1:
            k, l = next(iter(shapes))
            if k is not None and l is not None:
                aligned = (k, l)
    variables = all_vars(s.pattern) | set(params)
    arithmetic = all(deviation(s, v) != NOT_ARITHMETIC for v in variables)
    bound = {n.var for _, n, _ in walk(s.pattern) if isinstance(n, Iter)}
    return ClassReport(
        monadic=monadic,
        framed=framed,
        aligned=aligned,
        arithmetic=arithmetic,
        single_parameter=single,
        regularly_nested=monadic and single and arithmetic and aligned is not None,
        relaxed_shapes=_relaxed(frames, param, bound),
    )


@dataclass
class StrategyOptions:
    allow_emptiness: bool = True
    node_budget: int = 100_000
    loop_search_scope: str = "all"
    time_limit: Optional[float] = None


def run_strategy(s: Schema, opts: Optional[StrategyOptions] = None) -> Verdict:
    opts = opts or StrategyOptions()
    if not classify(s).regularly_nested:
        warnings.warn("schema is not regularly nested; termination is not guaranteed", stacklevel=2)
    o = Options(
        budget=opts.node_budget,
        time_limit=opts.time_limit,
        strategy=True,
        allow_emptiness=opts.allow_emptiness,
        loop_scope=opts.loop_search_scope,
    )
    return Prover(s, o).run()


def is_alignment_node(node: Node) -> bool:
    """Sits right after a full instantiation pass (and is not closed)."""
    return node.alignment and node.status != "closed"
