from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from distcert.poly import Poly, poly_sum, simplex_rows

MU = [Poly.mu(i) for i in range(3)]


def test_difference_of_squares():
    assert (MU[0] + 2) * (MU[0] - 2) == MU[0] * MU[0] - 4


def test_cancellation_gives_zero():
    p = MU[0] * 3 + Poly.var("a") - 7
    assert (p + (-1) * p).is_zero()
    assert (p - p) == Poly()


def test_mixed_degrees():
    prod = (Poly.var("a") * MU[0]) * (Poly.var("lam") * MU[1])
    assert prod.mu_degree() == 2
    assert prod.template_degree() == 2
    assert prod.template_vars() == {"a", "lam"}


def test_substitute_example():
    # C(q1, mu) = 5/4 - 5/4 mu_3 composed with mu_3 -> mu_2 + mu_3 / 2
    c = Poly.affine([0, 0, F(-5, 4)], F(5, 4))
    images = [MU[0], MU[1], MU[1] + MU[2] * F(1, 2)]
    assert c.substitute_mu(images) == Poly.affine([0, F(-5, 4), F(-5, 8)], F(5, 4))


def test_substitute_identity_and_zero():
    p = MU[0] * MU[1] + Poly.var("a") * MU[2] + 3
    assert p.substitute_mu(MU) == p
    assert p.substitute_mu([Poly()] * 3) == Poly.const(3)


def test_substitute_dimension_mismatch():
    with pytest.raises(ValueError):
        MU[2].substitute_mu(MU[:2])


def test_eval_examples():
    ranking = Poly.affine([250, 0, 750], 1)
    # 1 + 250/3 + 750/3
    assert ranking.eval_mu([F(1, 3)] * 3) == F(1003, 3)
    assert Poly().eval_mu([0, 0, 0]) == 0
    assert (MU[0] * MU[1]).eval_mu([F(2, 3), F(3, 4), 0]) == F(1, 2)


def test_eval_unassigned_variable():
    with pytest.raises(KeyError):
        (Poly.var("a") * MU[0]).eval({0: F(1)})


def test_affine_coeffs_and_simplex():
    p = Poly.affine([1, -2, 0], F(1, 2))
    assert p.affine_coeffs(3) == ([1, -2, 0], F(1, 2))
    rows = simplex_rows(2)
    assert all(r.eval_mu([F(1, 2), F(1, 2)]) >= 0 for r in rows)
    assert poly_sum([MU[0], MU[1], MU[2]]) == Poly.affine([1, 1, 1])


def test_sorted_terms_are_canonical():
    p = MU[2] * MU[0] + Poly.var("b") + MU[0] + 1
    q = 1 + MU[0] + Poly.var("b") + MU[0] * MU[2]
    assert p.sorted_terms() == q.sorted_terms()
    assert str(p) == str(q)


small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
VARS = [0, 1, 2, "a", "b"]


@st.composite
def polys(draw):
    terms = {}
    for _ in range(draw(st.integers(0, 4))):
        mono_vars = draw(st.lists(st.sampled_from(VARS), max_size=2))
        counts = {}
        for v in mono_vars:
            counts[v] = counts.get(v, 0) + 1
        key = tuple(sorted(counts.items(), key=lambda kv: (isinstance(kv[0], str), str(kv[0]))))
        p = Poly.const(draw(small))
        for v, e in key:
            for _ in range(e):
                p = p * Poly.var(v)
        terms[len(terms)] = p
    return poly_sum(terms.values())


@settings(max_examples=80)
@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r


@settings(max_examples=60)
@given(polys(), polys(), st.lists(polys(), min_size=3, max_size=3))
def test_substitute_is_homomorphism(p, q, images):
    assert (p * q).substitute_mu(images) == p.substitute_mu(images) * q.substitute_mu(images)
    assert (p + q).substitute_mu(images) == p.substitute_mu(images) + q.substitute_mu(images)


@settings(max_examples=60)
@given(polys(), polys())
def test_degree_of_product(p, q):
    prod = p * q
    if not prod.is_zero():
        assert prod.degree() == p.degree() + q.degree()
    assert (p + q).degree() <= max(p.degree(), q.degree())
