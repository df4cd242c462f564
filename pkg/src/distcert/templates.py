"""Symbolic affine templates for the ranking function, invariant and strategy."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .automata import Nba
from .mdp import DEFAULT_EPS_DEN, AffineDistStrategy, Mdp, MemorylessStrategy
from .poly import Poly, poly_sum

MAX_DISTRIBUTIONAL_STATES = 6


class TemplateError(ValueError):
    pass


def affine_at(coeffs: Sequence[str], offset: str, images: Sequence[Poly], den: Poly | None = None) -> Poly:
    """``sum_i coeffs[i] * images[i] + offset * den`` (``den`` defaults to 1)."""
    terms = [Poly.var(c) * img for c, img in zip(coeffs, images)]
    terms.append(Poly.var(offset) if den is None else Poly.var(offset) * den)
    return poly_sum(terms)


def identity_images(n: int) -> list[Poly]:
    return [Poly.mu(i) for i in range(n)]


@dataclass(frozen=True)
class CertTemplate:
    nba: Nba
    n_states: int
    invariant_size: int
    ranking: Mapping[str, tuple[tuple[str, ...], str]]
    invariant: Mapping[str, tuple[tuple[tuple[str, ...], str], ...]]

    def variables(self) -> list[str]:
        out = []
        for q in self.nba.states:
            a, b = self.ranking[q]
            out += list(a) + [b]
        for q in self.nba.states:
            for c, d in self.invariant[q]:
                out += list(c) + [d]
        return out

    def ranking_at(self, q: str, images: Sequence[Poly] | None = None, den: Poly | None = None) -> Poly:
        if q not in self.ranking:
            raise KeyError(f"unknown automaton state {q}")
        a, b = self.ranking[q]
        return affine_at(a, b, images or identity_images(self.n_states), den)

    def invariant_at(self, q: str, images: Sequence[Poly] | None = None, den: Poly | None = None) -> list[Poly]:
        if q not in self.invariant:
            raise KeyError(f"unknown automaton state {q}")
        imgs = images or identity_images(self.n_states)
        return [affine_at(c, d, imgs, den) for c, d in self.invariant[q]]


def make_cert_template(nba: Nba, n_states: int, n_i: int = 1) -> CertTemplate:
    if n_i < 1:
        raise TemplateError("invariant size must be at least 1")
    ranking = {}
    invariant = {}
    for qi, q in enumerate(nba.states):
        ranking[q] = (tuple(f"a_q{qi}_{i}" for i in range(n_states)), f"b_q{qi}")
        invariant[q] = tuple(
            (tuple(f"c_q{qi}_k{k}_{i}" for i in range(n_states)), f"d_q{qi}_k{k}")
            for k in range(n_i)
        )
    return CertTemplate(nba, n_states, n_i, ranking, invariant)


@dataclass(frozen=True)
class StrategyTemplate:
    mdp: Mdp
    kind: str  # "memoryless" | "distributional"
    probs: Mapping[tuple[str, str], str]
    numerators: Mapping[tuple[str, str], tuple[tuple[str, ...], str]]
    eps_den: Fraction = DEFAULT_EPS_DEN

    def variables(self) -> list[str]:
        if self.kind == "memoryless":
            return [self.probs[sa] for sa in self.mdp.pairs()]
        out = []
        for sa in self.mdp.pairs():
            e, f = self.numerators[sa]
            out += list(e) + [f]
        return out

    def numerator(self, s: str, a: str) -> Poly:
        e, f = self.numerators[(s, a)]
        return affine_at(e, f, identity_images(self.mdp.n))

    def denominator(self, s: str) -> Poly:
        return poly_sum(self.numerator(s, a) for a in self.mdp.available[s])


def make_strategy_template(mdp: Mdp, kind: str = "memoryless", eps_den: Fraction = DEFAULT_EPS_DEN) -> StrategyTemplate:
    si = mdp.index
    ai = {a: i for i, a in enumerate(mdp.actions)}
    if kind == "memoryless":
        probs = {(s, a): f"p_s{si[s]}_a{ai[a]}" for s, a in mdp.pairs()}
        return StrategyTemplate(mdp, kind, probs, {})
    if kind == "distributional":
        if mdp.n > MAX_DISTRIBUTIONAL_STATES:
            raise TemplateError(
                f"distributional strategies are limited to {MAX_DISTRIBUTIONAL_STATES} states "
                f"(got {mdp.n}); use the memoryless class"
            )
        nums = {
            (s, a): (
                tuple(f"e_s{si[s]}_a{ai[a]}_{i}" for i in range(mdp.n)),
                f"f_s{si[s]}_a{ai[a]}",
            )
            for s, a in mdp.pairs()
        }
        return StrategyTemplate(mdp, kind, {}, nums, eps_den)
    raise TemplateError(f"unknown strategy class {kind!r}")


AnyStrategy = Union[MemorylessStrategy, AffineDistStrategy, StrategyTemplate]


def symbolic_step(mdp: Mdp, strategy: AnyStrategy) -> tuple[list[Poly], Poly]:
    """Images of mu under one step, as numerators over a common denominator.

    Returns ``(images, den)`` with ``M(mu)_j = images[j] / den``.  Single-action
    states always play their action with probability 1.  For
    distributionally memoryless strategies the denominator is the product of
    the per-state denominators of the states with a choice, so it is positive
    wherever every state denominator is.
    """
    n = mdp.n
    if isinstance(strategy, MemorylessStrategy) or (
        isinstance(strategy, StrategyTemplate) and strategy.kind == "memoryless"
    ):
        acc: list[list[Poly]] = [[] for _ in range(n)]
        for i, s in enumerate(mdp.states):
            av = mdp.available[s]
            for a in av:
                if len(av) == 1:
                    weight = Poly.mu(i)
                elif isinstance(strategy, MemorylessStrategy):
                    p = strategy.at(s, a)
                    if not p:
                        continue
                    weight = Poly.mu(i).scale(p)
                else:
                    weight = Poly.var(strategy.probs[(s, a)]) * Poly.mu(i)
                for j, pr in enumerate(mdp.kernel[(s, a)]):
                    if pr:
                        acc[j].append(weight.scale(pr))
        return [poly_sum(terms) for terms in acc], Poly.const(1)

    # distributionally memoryless: numerator rows over affine forms in mu
    if isinstance(strategy, AffineDistStrategy):
        def num(s, a):
            e, f = strategy.numerators[(s, a)]
            return Poly.affine(e, f)
    else:
        def num(s, a):
            return strategy.numerator(s, a)

    multi = [s for s in mdp.states if len(mdp.available[s]) > 1]
    dens = {s: poly_sum(num(s, a) for a in mdp.available[s]) for s in multi}
    den = Poly.const(1)
    for s in multi:
        den = den * dens[s]
    others = {}
    for s in multi:
        prod = Poly.const(1)
        for t in multi:
            if t != s:
                prod = prod * dens[t]
        others[s] = prod
    acc = [[] for _ in range(n)]
    for i, s in enumerate(mdp.states):
        av = mdp.available[s]
        for a in av:
            if len(av) == 1:
                weight = Poly.mu(i) * den
            else:
                weight = Poly.mu(i) * num(s, a) * others[s]
            for j, pr in enumerate(mdp.kernel[(s, a)]):
                if pr:
                    acc[j].append(weight.scale(pr))
    return [poly_sum(terms) for terms in acc], den
