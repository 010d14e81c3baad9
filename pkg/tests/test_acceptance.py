"""Acceptance suite: one test and one PASS/FAIL line per criterion."""
import contextlib
import io
import random
import time
import warnings

import pytest

from schemata import linarith, looping, rules
from schemata.cli import corpus_names, corpus_text, main
from schemata.export import proof_dict
from schemata.generate import regularly_nested
from schemata.ground import evaluate_prop, solve_prop
from schemata.schema import realize
from schemata.strategy import StrategyOptions, classify, run_strategy
from schemata.syntax import parse_problem
from schemata.tableau import (
    Sat, Unknown, Unsat, UnsatUpTo, enumerate_baseline, fair_solve, local_soundness_violations,
    loop_certificate_violations,
)

from conftest import occurrence_violations, qe_violations


def cold():
    """Drop memo tables so timings do not profit from earlier tests."""
    for mod in (linarith, rules, looping):
        for name in dir(mod):
            fn = getattr(mod, name)
            if callable(getattr(fn, "cache_clear", None)):
                fn.cache_clear()


@pytest.fixture
def report(capsys):
    def emit(num: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def timed(fn, *args, **kw):
    cold()
    t = time.perf_counter()
    r = fn(*args, **kw)
    return r, time.perf_counter() - t


def corpus(name):
    return parse_problem(corpus_text(name))


def ground_unsat(s, values) -> bool:
    (p,) = s.parameters
    return all(solve_prop(realize(s, {p: v})) is None for v in values)


@pytest.fixture(scope="module")
def corpus_runs():
    """Both procedures on every corpus problem; the multiplier only briefly."""
    runs = {}
    for name in corpus_names():
        s = corpus(name)
        # the fair procedure need not terminate (nested, multiplier); its prefix is still checked
        runs[(name, "schdp")] = fair_solve(s, budget=300 if name == "multiplier" else 2000)
        if name != "multiplier":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                runs[(name, "strategy")] = run_strategy(s)
    return runs


def test_c01_chain_loops(report):
    s = corpus("example2")
    v, dt = timed(fair_solve, s)
    loops = v.tableau.loops if isinstance(v, Unsat) else []
    k1 = sum(1 for c in loops if c.shift == 1)
    nodes = len(v.tableau.nodes)
    base = enumerate_baseline(s, 10)
    ok = isinstance(v, Unsat) and k1 >= 1 and dt < 1.0 and nodes < 500 and base == UnsatUpTo(10)
    report(1, ok, f"{v.line()} k=1 loops={k1} nodes={nodes} time={dt:.3f}s baseline={base.line()}")


def test_c02_add_zero(report):
    s = corpus("adder_zero")
    v, dt = timed(run_strategy, s)
    edges = len(proof_dict(v.tableau)["loops"]) if v.tableau else 0
    oracle = ground_unsat(s, range(1, 7))
    ok = isinstance(v, Unsat) and dt < 10 and edges >= 2 and oracle
    report(2, ok, f"{v.line()} loop edges={edges} time={dt:.2f}s ground unsat n=1..6: {oracle}")


def test_c03_regularly_nested(report):
    s = corpus("nested")
    v, _ = timed(run_strategy, s)
    counts = v.tableau.counts()
    banned = counts.get("intervalise", 0) + counts.get("emptiness", 0)
    oracle = ground_unsat(s, range(0, 7))
    nodes = len(v.tableau.nodes)
    ok = isinstance(v, Unsat) and nodes < 10_000 and oracle and banned == 0
    report(3, ok, f"{v.line()} nodes={nodes} intervalise+emptiness={banned} ground unsat n=0..6: {oracle}")


def test_c04_adder(report):
    s = corpus("adder")
    v, dt = timed(run_strategy, s)
    checked = isinstance(v, Sat) and evaluate_prop(realize(s, v.env), v.model) and \
        solve_prop(realize(s, v.env)) is not None
    rn = classify(s).regularly_nested
    ok = checked and dt < 2 and rn
    report(4, ok, f"{v.line()} witness verified={checked} time={dt:.2f}s regularly_nested={rn}")


def test_c05_local_soundness(report, corpus_runs):
    bad, apps = [], 0
    for key, v in corpus_runs.items():
        apps += sum(1 for n in v.tableau.nodes if n.children)
        bad += [(key, b) for b in local_soundness_violations(v.tableau, max_param=8, samples=20)]
    report(5, not bad, f"{apps} rule applications over {len(corpus_runs)} runs, violations={len(bad)}")


def test_c06_qe(report):
    bad = qe_violations(200)
    report(6, not bad, f"200 fuzzed constraints on [-4..4]^vars, violations={len(bad)}")


def test_c07_occurrence(report):
    bad = occurrence_violations(100)
    report(7, not bad, f"100 fuzzed schemata, parameter <= 6, violations={len(bad)}")


def test_c08_loop_certificates(report, corpus_runs):
    bad, certs = [], 0
    for key, v in corpus_runs.items():
        certs += len(v.tableau.loops)
        bad += [(key, b) for b in loop_certificate_violations(v.tableau, range(1, 9))]
    report(8, not bad and certs > 0, f"{certs} certificates checked for n=1..8, violations={len(bad)}")


def test_c09_termination_family(report):
    rng = random.Random(2024)
    t = time.perf_counter()
    worst, unfinished = 0, []
    for i in range(50):
        s = regularly_nested(rng, symbols=rng.randint(1, 3), depth=2, k=1, l=rng.randint(0, 2))
        assert classify(s).regularly_nested
        v = run_strategy(s, StrategyOptions(node_budget=100_000))
        worst = max(worst, len(v.tableau.nodes))
        if isinstance(v, Unknown):
            unfinished.append(i)
    dt = time.perf_counter() - t
    ok = not unfinished and dt < 60
    report(9, ok, f"50 schemata, largest tableau={worst} nodes, unfinished={len(unfinished)}, total={dt:.1f}s")


def test_c10_multiplier_budget(report):
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = main(["solve", "corpus:multiplier", "--budget", "5000"])
    line = out.getvalue().strip()
    report(10, code == 0 and line == "VERDICT: UNKNOWN budget", f"{line} exit={code}")
