"""Quantifier elimination for ForallConstraints via Farkas' lemma and Handelman's theorem.

Each conclusion row ``g >= 0`` is replaced by fresh multipliers ``lam >= 0``
and the polynomial identity ``g = sum_k lam_k * prod_k`` in mu, where
``prod_k`` ranges over products of premise rows (for Farkas: the constant 1
and the rows themselves).  The identity is imposed coefficient-wise.
"""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .constraints import ForallConstraint, Relation
from .lp import is_feasible
from .poly import Poly, mono_sort_key

DEFAULT_MAX_PRODUCTS = 20000


class TransformError(ValueError):
    pass


@dataclass
class ExistentialSystem:
    variables: list[str] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)

    def declare(self, names: Iterable[str]) -> None:
        seen = set(self.variables)
        for v in names:
            if v not in seen:
                self.variables.append(v)
                seen.add(v)

    def add(self, rel: Relation) -> None:
        self.relations.append(rel)

    def extend(self, other: "ExistentialSystem") -> None:
        self.declare(other.variables)
        self.relations.extend(other.relations)

    def provenance(self) -> dict[int, str]:
        return {i: r.label for i, r in enumerate(self.relations)}

    def check_closed(self) -> None:
        declared = set(self.variables)
        for r in self.relations:
            for v in r.poly.variables():
                if isinstance(v, int):
                    raise TransformError(f"distribution variable left in relation {r.label}")
                if v not in declared:
                    raise TransformError(f"undeclared variable {v} in relation {r.label}")


def premise_feasible(premise: Sequence[Poly]) -> bool:
    """Exact feasibility of a template-free affine premise."""
    for p in premise:
        if p.has_template_vars():
            raise TransformError("premise_feasible needs a premise without template variables")
        if p.mu_degree() > 1:
            raise TransformError("premise rows must be affine")
    n = 1 + max((v for p in premise for v in p.variables()), default=-1)
    return is_feasible([p.affine_coeffs(n) for p in premise], n)


def monoid(premise: Sequence[Poly], degree: int) -> list[tuple[tuple[int, ...], Poly]]:
    """Products of premise rows over multisets of size <= degree (empty product first)."""
    out = []
    cache: dict[tuple[int, ...], Poly] = {(): Poly.const(1)}
    for size in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(len(premise)), size):
            if combo not in cache:
                cache[combo] = cache[combo[:-1]] * premise[combo[-1]]
            out.append((combo, cache[combo]))
    return out


def _count_products(m: int, degree: int) -> int:
    return sum(comb(m + k - 1, k) for k in range(degree + 1))


def _transform(c: ForallConstraint, degree: int, max_products: int) -> ExistentialSystem:
    sys = ExistentialSystem()
    if not c.premise_has_templates() and not premise_feasible(c.premise):
        return sys
    total = _count_products(len(c.premise), degree)
    if total > max_products:
        raise TransformError(
            f"{c.label}: Handelman monoid has {total} products at degree {degree} "
            f"(limit {max_products})"
        )
    products = monoid(c.premise, degree)
    prod_coeffs = [p.by_mu_monomial() for _, p in products]
    for ri, g in enumerate(c.conclusion):
        names = [f"lam_{c.label}_{ri}_{k}" for k in range(len(products))]
        sys.declare(names)
        for name in names:
            sys.add(Relation(Poly.var(name), "ge", c.label))
        g_coeffs = g.by_mu_monomial()
        monos = set(g_coeffs)
        for pc in prod_coeffs:
            monos.update(pc)
        for mono in sorted(monos, key=mono_sort_key):
            expr = g_coeffs.get(mono, Poly())
            for name, pc in zip(names, prod_coeffs):
                coef = pc.get(mono)
                if coef is not None:
                    expr = expr - Poly.var(name) * coef
            if not expr.is_zero():
                sys.add(Relation(expr, "eq", c.label))
    return sys


def farkas_transform(c: ForallConstraint) -> ExistentialSystem:
    for row in c.conclusion:
        if row.mu_degree() > 1:
            raise TransformError(f"{c.label}: conclusion of degree {row.mu_degree()} requires Handelman")
    for row in c.premise:
        if row.mu_degree() > 1:
            raise TransformError(f"{c.label}: premise rows must be affine")
    return _transform(c, 1, DEFAULT_MAX_PRODUCTS)


def handelman_transform(
    c: ForallConstraint, degree: int, max_products: int = DEFAULT_MAX_PRODUCTS
) -> ExistentialSystem:
    need = c.conclusion_mu_degree()
    if degree < need:
        raise TransformError(f"{c.label}: Handelman degree {degree} below conclusion degree {need}")
    for row in c.premise:
        if row.mu_degree() > 1:
            raise TransformError(f"{c.label}: premise rows must be affine")
    return _transform(c, degree, max_products)


def strengthen(c: ForallConstraint) -> ForallConstraint:
    """Drop premise rows that mention template variables.

    A weaker premise makes the implication stronger, so any solution of the
    strengthened constraint solves the original.  With a fixed strategy the
    transformed system becomes linear.  Constraints that demand an empty
    premise switch to their exclusion row (an invariant row at most -1 on
    what remains of the premise); invariant rows are scale-free, so this
    loses nothing against "negative on the remaining premise".
    """
    kept = tuple(p for p in c.premise if not p.has_template_vars())
    conclusion = c.conclusion if c.exclusion is None else (c.exclusion,)
    return ForallConstraint(kept, conclusion, c.label)


def transform(
    c: ForallConstraint, handelman_degree: int | None = None, strengthened: bool = False
) -> ExistentialSystem:
    """Farkas when every conclusion is affine in mu, Handelman otherwise."""
    if strengthened:
        c = strengthen(c)
    need = c.conclusion_mu_degree()
    if need <= 1:
        return farkas_transform(c)
    return handelman_transform(c, max(need, handelman_degree or 2))
