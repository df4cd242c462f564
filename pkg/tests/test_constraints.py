from fractions import Fraction as F

from distcert.atoms import satisfiable_letters
from distcert.automata import parse_hoa
from distcert.constraints import (
    count_choices,
    enumerate_choices,
    gen_all_buchi,
    gen_buchi,
    gen_initial,
    gen_strategy_validity,
)
from distcert.poly import Poly, simplex_rows
from distcert.region import InitRegion
from distcert.templates import make_cert_template, make_strategy_template, symbolic_step

THIRD = F(1, 3)

BRANCHY = """HOA: v1
States: 2
Start: 0
AP: 1 "V0>=0.5"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0
[t] 1
State: 1 {0}
[0] 1
[0] 0
--END--
"""


def test_initial_point(gf_nba, init_point):
    t = make_cert_template(gf_nba, 3)
    (c,), rels, names = gen_initial("universal", init_point, t)
    assert rels == [] and names == []
    for i in range(3):
        assert Poly.mu(i) - THIRD in c.premise
        assert Poly.const(THIRD) - Poly.mu(i) in c.premise
    assert c.conclusion == (t.ranking_at("q0"), *t.invariant_at("q0"))


def test_initial_simplex(gf_nba):
    t = make_cert_template(gf_nba, 3)
    (c,), _, _ = gen_initial("universal", InitRegion.simplex(3), t)
    assert list(c.premise) == simplex_rows(3)


def test_initial_existential(gf_nba):
    t = make_cert_template(gf_nba, 3)
    foralls, rels, names = gen_initial("existential", InitRegion.simplex(3), t)
    assert foralls == [] and names == ["m0_0", "m0_1", "m0_2"]
    assert all(not r.poly.mu_degree() for r in rels)
    assert len(rels) == len(simplex_rows(3)) + 2


def test_buchi_row_counts(running, gf_nba, b_at_a):
    t = make_cert_template(gf_nba, 3)
    images, den = symbolic_step(running, b_at_a)
    (choice,) = enumerate_choices(gf_nba, satisfiable_letters(gf_nba.ap, 3))
    p = frozenset({0})
    nonacc = gen_buchi("q0", p, choice, t, images, den)
    # decrease, nonnegativity at the successor, one invariant row
    assert len(nonacc.conclusion) == 3
    assert nonacc.conclusion[0] == t.ranking_at("q0") - 1 - t.ranking_at("q1", images)
    acc = gen_buchi("q1", p, choice, t, images, den)
    assert len(acc.conclusion) == 2


def test_dead_letter_is_premise_infeasibility(running, b_at_a):
    nba = parse_hoa('HOA: v1\nStates: 1\nStart: 0\nAP: 1 "V0>=0.5"\nAcceptance: 1 Inf(0)\n'
                    "--BODY--\nState: 0 {0}\n[0] 0\n--END--\n", 3)
    t = make_cert_template(nba, 3)
    images, den = symbolic_step(running, b_at_a)
    c = gen_buchi("q0", frozenset(), {}, t, images, den)
    assert c.conclusion == (Poly.const(-1),)
    assert c.exclusion is not None


def test_choice_counts(gf_nba):
    letters = satisfiable_letters(gf_nba.ap, 3)
    assert count_choices(gf_nba, letters) == 1
    branchy = parse_hoa(BRANCHY, 3)
    letters = satisfiable_letters(branchy.ap, 3)
    # q0 branches on both letters, q1 only on the letter containing the atom
    assert count_choices(branchy, letters) == 8
    first = list(enumerate_choices(branchy, letters))
    assert len(first) == 8
    assert first == list(enumerate_choices(branchy, letters))
    assert len(list(enumerate_choices(branchy, letters, budget=3))) == 3


def test_buchi_constraint_count_pinned(running, gf_nba, b_at_a):
    t = make_cert_template(gf_nba, 3)
    images, den = symbolic_step(running, b_at_a)
    letters = satisfiable_letters(gf_nba.ap, 3)
    (choice,) = enumerate_choices(gf_nba, letters)
    assert len(gen_all_buchi(t, letters, choice, images, den)) == 4


def test_memoryless_validity(running):
    st_t = make_strategy_template(running)
    foralls, rels = gen_strategy_validity(st_t)
    assert foralls == []
    pa, pb = (Poly.var(st_t.probs[("A", x)]) for x in "ab")
    pB = Poly.var(st_t.probs[("B", "a")])
    pC = Poly.var(st_t.probs[("C", "a")])
    got = {(r.poly, r.rel) for r in rels}
    assert got == {(pa + pb - 1, "eq"), (pa, "ge"), (pb, "ge"), (pB - 1, "eq"), (pC - 1, "eq")}


def test_distributional_validity(running):
    foralls, rels = gen_strategy_validity(make_strategy_template(running, "distributional"))
    assert rels == []
    at_a = [c for c in foralls if c.label.startswith("strategy_s0_")]
    assert len(at_a) == 3
    # single-action states only bound the denominator
    assert len([c for c in foralls if c.label.startswith("strategy_s1_")]) == 1
