import itertools
import random

from hypothesis import given, settings, strategies as st

from schemata.ground import (
    PAnd, PLit, POr, PFALSE, PTRUE, atoms_of, dpll, evaluate_prop, pand, pneg, por, solve_prop, to_cnf, to_dimacs,
)


def random_formula(rng: random.Random, atoms, depth: int = 3):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.05:
            return rng.choice((PTRUE, PFALSE))
        return PLit(rng.choice(atoms), rng.random() < 0.5)
    parts = [random_formula(rng, atoms, depth - 1) for _ in range(rng.randint(2, 3))]
    return pand(parts) if rng.random() < 0.5 else por(parts)


def truth_table_sat(f) -> bool:
    names = atoms_of(f)
    return any(
        evaluate_prop(f, dict(zip(names, vals)))
        for vals in itertools.product((False, True), repeat=len(names))
    )


def truth_table_violations(cases: int, seed: int = 3):
    rng = random.Random(seed)
    bad = []
    for i in range(cases):
        f = random_formula(rng, ["a", "b", "c", "d", "e"][: rng.randint(1, 5)], depth=rng.randint(1, 4))
        m = solve_prop(f)
        expect = truth_table_sat(f)
        if (m is not None) != expect or (m is not None and not evaluate_prop(f, m)):
            bad.append((i, f))
    return bad


def test_truth_tables():
    assert truth_table_violations(200) == []


def test_constants_and_negation():
    assert solve_prop(PFALSE) is None
    assert solve_prop(PTRUE) == {}
    f = pand([PLit("a"), PLit("a", False)])
    assert solve_prop(f) is None
    assert pneg(pneg(f)) == f


def test_dpll_unit_chain():
    # 1, 1 -> 2, 2 -> 3, not 3
    assert dpll(3, [[1], [-1, 2], [-2, 3], [-3]]) is None
    model = dpll(3, [[1], [-1, 2], [-2, 3]])
    assert model is not None and all(model[1:4])


def test_dimacs_header_matches_clauses():
    f = por([pand([PLit("x"), PLit("y", False)]), PLit("z")])
    text = to_dimacs(f)
    header = [ln for ln in text.splitlines() if ln.startswith("p cnf")][0]
    nv, nc = map(int, header.split()[2:])
    clauses = [ln for ln in text.splitlines() if ln and ln[0] not in "cp"]
    assert len(clauses) == nc
    assert max(abs(int(t)) for ln in clauses for t in ln.split()) <= nv


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_cnf_is_equisatisfiable(seed):
    f = random_formula(random.Random(seed), ["a", "b", "c", "d"])
    cnf = to_cnf(f)
    assert (dpll(cnf.nvars, cnf.clauses) is not None) == truth_table_sat(f)
