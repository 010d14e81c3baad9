"""Proof export: JSON and Graphviz DOT renderings of a tableau."""
from __future__ import annotations

import json
from typing import Any, Dict

from . import linarith as la
from .syntax import format_pattern
from .tableau import Tableau

STATUS = {"open": "Open", "closed": "Closed", "loop": "LoopClosed", "sat": "Sat", "stuck": "Stuck"}


def proof_dict(t: Tableau) -> Dict[str, Any]:
    """The ProofExport shape: nodes, parent edges and loop edges."""
    nodes = []
    edges = []
    for n in t.nodes:
        st = n.state
        parent = t.nodes[n.parent] if n.parent is not None else None
        nodes.append({
            "id": n.id,
            "pattern": format_pattern(st.pattern),
            "constraint": la.format_constraint(st.constraint),
            "lits": [format_pattern(L) for L in st.lits],
            "status": STATUS[n.status],
            # the rule that produced this node; the root has none
            "rule": parent.rule if parent else None,
            "applied": n.rule,
            "phase": n.phase,
            "alignment": n.alignment,
        })
        for c in n.children:
            edges.append({"from": n.id, "to": c})
    loops = [
        {"from": c.bud, "to": c.companion, "k": c.shift, "parameter": c.parameter}
        for c in t.loops
    ]
    return {"nodes": nodes, "edges": edges, "loops": loops}


def to_json(t: Tableau) -> str:
    return json.dumps(proof_dict(t), indent=2)


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(t: Tableau) -> str:
    d = proof_dict(t)
    out = ["digraph tableau {", '  node [shape=ellipse, fontname="monospace"];']
    for n in d["nodes"]:
        body = n["pattern"]
        if n["lits"]:
            body += " | " + ", ".join(n["lits"])
        label = f'{n["id"]}: {body}\\n{n["constraint"]}'
        if n["status"] == "Closed":
            out.append(f'  n{n["id"]} [shape=box, label="{_esc(label)}\\n×"];')
        elif n["status"] == "LoopClosed":
            out.append(f'  n{n["id"]} [shape=box, style=rounded, label="{_esc(label)}\\n↺"];')
        else:
            out.append(f'  n{n["id"]} [label="{_esc(label)}"];')
    for e in d["edges"]:
        child = d["nodes"][e["to"]]
        out.append(f'  n{e["from"]} -> n{e["to"]} [label="{_esc(child["rule"] or "")}"];')
    for e in d["loops"]:
        out.append(f'  n{e["from"]} -> n{e["to"]} [style=dashed, constraint=false, label="k={e["k"]}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def export_proof(t: Tableau, fmt: str = "json") -> bytes:
    if fmt == "json":
        return to_json(t).encode()
    if fmt == "dot":
        return to_dot(t).encode()
    raise ValueError(f"unknown format {fmt!r}")
