"""Constraint generation for the initial, Büchi-ranking and strategy conditions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

from .atoms import Letter, guard_of, letter_sort_key
from .automata import Nba
from .poly import Poly, simplex_rows
from .region import InitRegion
from .templates import CertTemplate, StrategyTemplate

DEFAULT_CHOICE_BUDGET = 256

SuccessorChoice = Mapping  # Mapping[tuple[str, Letter], str]


@dataclass(frozen=True)
class ForallConstraint:
    """forall mu. (all premise rows >= 0) => (all conclusion rows >= 0)."""

    premise: tuple[Poly, ...]
    conclusion: tuple[Poly, ...]
    label: str
    # For constraints whose premise must be empty: a row that, once valid on
    # the template-free part of the premise, makes the full premise empty.
    exclusion: Optional[Poly] = None

    def premise_has_templates(self) -> bool:
        return any(p.has_template_vars() for p in self.premise)

    def conclusion_mu_degree(self) -> int:
        return max((c.mu_degree() for c in self.conclusion), default=0)


@dataclass(frozen=True)
class Relation:
    """Quantifier-free ``poly >= 0`` (rel "ge") or ``poly = 0`` (rel "eq")."""

    poly: Poly
    rel: str
    label: str


def letter_tag(letter: Letter) -> str:
    return f"l{letter_sort_key(letter)}"


def gen_initial(
    mode: str, init: InitRegion, t: CertTemplate
) -> tuple[list[ForallConstraint], list[Relation], list[str]]:
    """Initial condition.

    Universal mode yields one ForallConstraint per premise piece (the region,
    or each point).  Existential mode over a region introduces fresh point
    variables and yields plain relations; the returned list names them.
    Existential mode over points expects a single point (the driver
    enumerates candidates).
    """
    q0 = t.nba.q0
    conclusion = [t.ranking_at(q0)] + t.invariant_at(q0)
    if not init.is_nonempty():
        raise ValueError("initial region is empty")
    if mode == "universal" or (mode == "existential" and init.points):
        if mode == "existential" and len(init.points) != 1:
            raise ValueError("existential mode over points takes one candidate point at a time")
        out = []
        pieces = init.premises()
        for k, premise in enumerate(pieces):
            label = "init" if len(pieces) == 1 else f"init_pt{k}"
            out.append(ForallConstraint(tuple(premise), tuple(conclusion), label))
        return out, [], []
    if mode != "existential":
        raise ValueError(f"unknown mode {mode!r}")
    n = init.n
    names = [f"m0_{i}" for i in range(n)]
    point = [Poly.var(v) for v in names]
    rels = []
    for k, row in enumerate(simplex_rows(n) + list(init.rows)):
        rels.append(Relation(row.substitute_mu(point), "ge", f"init_region_{k}"))
    for k, row in enumerate(conclusion):
        rels.append(Relation(row.substitute_mu(point), "ge", f"init_{k}"))
    return [], rels, names


def gen_buchi(
    q: str,
    letter: Letter,
    choice: SuccessorChoice,
    t: CertTemplate,
    images: Sequence[Poly],
    den: Poly,
) -> ForallConstraint:
    nba = t.nba
    n = t.n_states
    qi = nba.index[q]
    accepting = nba.is_accepting(q)
    c_here = t.ranking_at(q)
    premise = simplex_rows(n) + guard_of(letter, nba.ap) + [c_here] + t.invariant_at(q)
    succ = nba.succ(q, letter)
    acc_tag = "acc" if accepting else "nacc"
    if not succ:
        label = f"buchi_q{qi}_{letter_tag(letter)}_none_{acc_tag}"
        exclusion = -t.invariant_at(q)[0] - 1
        return ForallConstraint(tuple(premise), (Poly.const(-1),), label, exclusion)
    target = choice[(q, letter)]
    if target not in succ:
        raise ValueError(f"choice {target} is not a successor of ({q}, {sorted(letter)})")
    c_next = t.ranking_at(target, images, den)
    inv_next = t.invariant_at(target, images, den)
    if accepting:
        conclusion = [c_next] + inv_next
    else:
        decrease = (c_here - 1) * den - c_next
        conclusion = [decrease, c_next] + inv_next
    label = f"buchi_q{qi}_{letter_tag(letter)}_q{nba.index[target]}_{acc_tag}"
    return ForallConstraint(tuple(premise), tuple(conclusion), label)


def choice_points(nba: Nba, letters: Sequence[Letter]) -> list[tuple[tuple[str, Letter], tuple[str, ...]]]:
    return [
        ((q, letter), nba.succ(q, letter))
        for q in nba.states
        for letter in letters
        if nba.succ(q, letter)
    ]


def count_choices(nba: Nba, letters: Sequence[Letter]) -> int:
    return math.prod(len(targets) for _, targets in choice_points(nba, letters))


def enumerate_choices(
    nba: Nba, letters: Sequence[Letter], budget: Optional[int] = None
) -> Iterator[dict]:
    """Successor choices in lexicographic order, at most ``budget`` of them."""
    points = choice_points(nba, letters)
    keys = [k for k, _ in points]
    combos = itertools.product(*(targets for _, targets in points))
    if budget is not None:
        combos = itertools.islice(combos, budget)
    for combo in combos:
        yield dict(zip(keys, combo))


def gen_all_buchi(
    t: CertTemplate,
    letters: Sequence[Letter],
    choice: SuccessorChoice,
    images: Sequence[Poly],
    den: Poly,
) -> list[ForallConstraint]:
    return [
        gen_buchi(q, letter, choice, t, images, den)
        for q in t.nba.states
        for letter in letters
    ]


def gen_strategy_validity(st: StrategyTemplate) -> tuple[list[ForallConstraint], list[Relation]]:
    mdp = st.mdp
    if st.kind == "memoryless":
        rels = []
        for si, s in enumerate(mdp.states):
            av = mdp.available[s]
            ps = [Poly.var(st.probs[(s, a)]) for a in av]
            total = ps[0]
            for p in ps[1:]:
                total = total + p
            rels.append(Relation(total - 1, "eq", f"strategy_s{si}_sum"))
            if len(av) > 1:
                for a, p in zip(av, ps):
                    rels.append(Relation(p, "ge", f"strategy_s{si}_{st.probs[(s, a)]}_nonneg"))
        return [], rels
    simplex = tuple(simplex_rows(mdp.n))
    out = []
    for si, s in enumerate(mdp.states):
        av = mdp.available[s]
        if len(av) > 1:
            for ai, a in enumerate(av):
                out.append(ForallConstraint(simplex, (st.numerator(s, a),), f"strategy_s{si}_n{ai}"))
        out.append(ForallConstraint(simplex, (st.denominator(s) - st.eps_den,), f"strategy_s{si}_den"))
    return out, []
