from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from distcert.atoms import parse_atom
from distcert.automata import parse_ltl_pattern
from distcert.mdp import MemorylessStrategy, parse_mdp, step
from distcert.poly import Poly
from distcert.templates import (
    TemplateError,
    make_cert_template,
    make_strategy_template,
    symbolic_step,
)


def test_running_counts(gf_nba):
    t = make_cert_template(gf_nba, 3, 1)
    assert len(t.variables()) == 16
    assert len(make_cert_template(gf_nba, 3, 2).variables()) == 24
    one = parse_ltl_pattern("G p", [parse_atom("V0>=0", 1)])
    assert len(make_cert_template(one, 1, 1).variables()) == 4


def test_invariant_size_must_be_positive(gf_nba):
    with pytest.raises(TemplateError):
        make_cert_template(gf_nba, 3, 0)


def test_unknown_location(gf_nba):
    with pytest.raises(KeyError):
        make_cert_template(gf_nba, 3).ranking_at("q9")


def test_names_are_deterministic(gf_nba):
    assert make_cert_template(gf_nba, 3, 2).variables() == make_cert_template(gf_nba, 3, 2).variables()


@settings(max_examples=30)
@given(st.integers(1, 3), st.integers(1, 5), st.integers(1, 3))
def test_count_formula(n_q, n_s, n_i):
    atom = parse_atom("V0>=0", n_s)
    nba = parse_ltl_pattern("G p" if n_q == 1 else "G F p", [atom])
    t = make_cert_template(nba, n_s, n_i)
    q = len(nba.states)
    assert len(t.variables()) == q * (n_s + 1) + q * n_i * (n_s + 1)
    assert len(set(t.variables())) == len(t.variables())


def test_memoryless_images(running, gf_nba):
    st_t = make_strategy_template(running, "memoryless")
    images, den = symbolic_step(running, st_t)
    assert den == Poly.const(1)
    assert images[1] == Poly.var(st_t.probs[("A", "b")]) * Poly.mu(0)
    c = make_cert_template(gf_nba, 3)
    composed = c.ranking_at("q1", images)
    assert composed.mu_degree() == 1 and composed.template_degree() == 2


def test_fixed_strategy_recovers_hand_map(running, b_at_a):
    images, den = symbolic_step(running, b_at_a)
    mu = [Poly.mu(i) for i in range(3)]
    assert den == Poly.const(1)
    assert images == [mu[2] * F(1, 2), mu[0], mu[1] + mu[2] * F(1, 2)]


def test_distributional_images_are_quadratic(running, gf_nba):
    st_t = make_strategy_template(running, "distributional")
    images, den = symbolic_step(running, st_t)
    assert max(i.mu_degree() for i in images) == 2
    c = make_cert_template(gf_nba, 3)
    assert c.ranking_at("q0", images, den).mu_degree() == 2


def test_distributional_state_cap():
    states = " ".join(f"S{i}" for i in range(7))
    trans = "\n".join(f"trans S{i} a -> S0:1\ntrans S{i} b -> S0:1" for i in range(7))
    mdp = parse_mdp(f"states: {states}\nactions: a b\n{trans}\n")
    with pytest.raises(TemplateError, match="memoryless"):
        make_strategy_template(mdp, "distributional")


def test_chain_images_ignore_strategy():
    chain = parse_mdp("states: X Y\nactions: go\ntrans X go -> Y:1\ntrans Y go -> X:1/2 Y:1/2\n")
    images, _ = symbolic_step(chain, make_strategy_template(chain))
    assert not any(i.has_template_vars() for i in images)


@st.composite
def point_and_prob(draw):
    w = [draw(st.integers(0, 20)) for _ in range(3)]
    if not any(w):
        w[1] = 1
    mu = tuple(F(x, sum(w)) for x in w)
    return mu, draw(st.fractions(min_value=0, max_value=1, max_denominator=50))


@settings(max_examples=120)
@given(point_and_prob())
def test_symbolic_step_matches_concrete(running, pp):
    mu, p = pp
    st_t = make_strategy_template(running)
    values = {st_t.probs[("A", "a")]: p, st_t.probs[("A", "b")]: 1 - p,
              st_t.probs[("B", "a")]: F(1), st_t.probs[("C", "a")]: F(1)}
    images, den = symbolic_step(running, st_t)
    strat = MemorylessStrategy({k: values[v] for k, v in st_t.probs.items()})
    concrete = step(running, strat, mu)
    assignment = dict(values)
    assignment.update({i: x for i, x in enumerate(mu)})
    assert tuple(img.eval(assignment) / den.eval(assignment) for img in images) == concrete
