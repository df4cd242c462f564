"""Product of the distribution-transformer dynamics with a Büchi automaton."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .atoms import Letter, format_letter, guard_of, letter_of, satisfiable_letters
from .automata import Nba
from .mdp import Mdp, Strategy, step
from .poly import Poly
from .region import InitRegion


@dataclass(frozen=True)
class PdtsTransition:
    source: str
    target: str
    letter: Letter
    guard: tuple[Poly, ...]
    update: str  # "fixed" (linear map of a concrete strategy) or "symbolic"


@dataclass(frozen=True)
class Pdts:
    mdp: Mdp
    nba: Nba
    init: InitRegion
    letters: tuple[Letter, ...]
    transitions: tuple[PdtsTransition, ...]
    update: str

    @property
    def locations(self) -> tuple[str, ...]:
        return self.nba.states

    @property
    def init_location(self) -> str:
        return self.nba.q0

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(f"mu{i}" for i in range(self.mdp.n))

    @property
    def edge_count(self) -> int:
        """Transitions merged over letters: one per (source, target) pair."""
        return len({(t.source, t.target) for t in self.transitions})

    def outgoing(self, q: str) -> list[PdtsTransition]:
        return [t for t in self.transitions if t.source == q]

    def report(self) -> str:
        lines = [
            f"locations: {' '.join(self.locations)} (initial {self.init_location}, "
            f"accepting {' '.join(q for q in self.locations if q in self.nba.accepting)})",
            f"variables: {' '.join(self.variables)}",
            f"init: {self.init.describe()}",
            f"update: {self.update}",
        ]
        for t in self.transitions:
            guard = " & ".join(f"{g} >= 0" for g in t.guard) or "true"
            lines.append(
                f"{t.source} -> {t.target} on {format_letter(t.letter, self.nba.ap)}: [{guard}]"
            )
        return "\n".join(lines) + "\n"


def build_pdts(mdp: Mdp, nba: Nba, init: InitRegion, strategy: Strategy | None = None) -> Pdts:
    """``strategy=None`` builds the symbolic-strategy product used for synthesis."""
    for a in nba.ap:
        if a.dim != mdp.n:
            raise ValueError(f"atom {a} has dimension {a.dim}, MDP has {mdp.n} states")
    if init.n != mdp.n:
        raise ValueError(f"initial region over {init.n} states, MDP has {mdp.n}")
    if not init.is_nonempty():
        raise ValueError("initial region does not intersect the probability simplex")
    letters = tuple(satisfiable_letters(nba.ap, mdp.n))
    update = "symbolic" if strategy is None else "fixed"
    trans = []
    for q in nba.states:
        for letter in letters:
            guard = tuple(guard_of(letter, nba.ap))
            for t in nba.succ(q, letter):
                trans.append(PdtsTransition(q, t, letter, guard, update))
    return Pdts(mdp, nba, init, letters, tuple(trans), update)


def successor_states(
    pdts: Pdts, q: str, mu: Sequence[Fraction], strategy: Strategy
) -> set[tuple[str, tuple]]:
    """Successors under strict atom semantics."""
    letter = letter_of(pdts.nba.ap, mu)
    targets = pdts.nba.succ(q, letter)
    if not targets:
        return set()
    nxt = step(pdts.mdp, strategy, mu)
    return {(t, nxt) for t in targets}
