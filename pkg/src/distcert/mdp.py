"""MDP model, strategies and the one-step distribution transformer.

Everything is exact: probabilities are :class:`fractions.Fraction` and a
distribution is a tuple of them indexed by the MDP's state enumeration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .lp import solve_lp

Distribution = tuple  # tuple[Fraction, ...]

DEFAULT_EPS_DEN = Fraction(1, 1000)


class MdpSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int = 1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class MdpError(ValueError):
    """Semantically invalid model or strategy."""


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or a decimal literal exactly."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational literal: {text!r}") from None


@dataclass(frozen=True)
class Mdp:
    states: tuple[str, ...]
    actions: tuple[str, ...]
    available: Mapping[str, tuple[str, ...]]
    kernel: Mapping[tuple[str, str], tuple[Fraction, ...]]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})
        self.validate()

    @property
    def n(self) -> int:
        return len(self.states)

    def validate(self) -> None:
        if not self.states:
            raise MdpError("MDP has no states")
        if len(set(self.states)) != len(self.states):
            raise MdpError("duplicate state names")
        acts = set(self.actions)
        for s in self.states:
            av = self.available.get(s, ())
            if not av:
                raise MdpError(f"state {s} has no available actions")
            for a in av:
                if a not in acts:
                    raise MdpError(f"unknown action {a} at state {s}")
                row = self.kernel.get((s, a))
                if row is None:
                    raise MdpError(f"no transition row for ({s}, {a})")
                if len(row) != self.n or any(p < 0 for p in row):
                    raise MdpError(f"malformed transition row for ({s}, {a})")
                total = sum(row)
                if total != 1:
                    raise MdpError(f"row ({s}, {a}): row sum {total} ≠ 1")
        for (s, a) in self.kernel:
            if s not in self.index or a not in self.available.get(s, ()):
                raise MdpError(f"transition row for unavailable pair ({s}, {a})")

    def is_chain(self) -> bool:
        return all(len(self.available[s]) == 1 for s in self.states)

    def pairs(self) -> list[tuple[str, str]]:
        """All (state, available action) pairs in enumeration order."""
        return [(s, a) for s in self.states for a in self.available[s]]

    def to_text(self) -> str:
        lines = [f"states: {' '.join(self.states)}", f"actions: {' '.join(self.actions)}"]
        for s, a in self.pairs():
            targets = " ".join(
                f"{t}:{p}" for t, p in zip(self.states, self.kernel[(s, a)]) if p
            )
            lines.append(f"trans {s} {a} -> {targets}")
        return "\n".join(lines) + "\n"


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*$")


def parse_mdp(text: str) -> Mdp:
    states: list[str] | None = None
    actions: list[str] | None = None
    rows: dict[tuple[str, str], dict[str, Fraction]] = {}
    order: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        col = raw.index(line[0]) + 1
        if line.startswith("states:"):
            states = line[len("states:"):].split()
            for s in states:
                if not _IDENT.match(s):
                    raise MdpSyntaxError(f"bad state name {s!r}", lineno, col)
        elif line.startswith("actions:"):
            actions = line[len("actions:"):].split()
        elif line.startswith("trans "):
            if states is None or actions is None:
                raise MdpSyntaxError("'trans' before 'states:'/'actions:'", lineno, col)
            head, sep, tail = line[len("trans "):].partition("->")
            if not sep:
                raise MdpSyntaxError("expected '->'", lineno, col)
            parts = head.split()
            if len(parts) != 2:
                raise MdpSyntaxError("expected 'trans <state> <action> ->'", lineno, col)
            s, a = parts
            if s not in states:
                raise MdpError(f"line {lineno}: unknown state {s}")
            if a not in actions:
                raise MdpError(f"line {lineno}: unknown action {a}")
            if (s, a) in rows:
                raise MdpError(f"line {lineno}: duplicate row for ({s}, {a})")
            row: dict[str, Fraction] = {}
            for item in tail.split():
                t, colon, p = item.partition(":")
                if not colon:
                    raise MdpSyntaxError(f"expected <state>:<prob>, got {item!r}", lineno,
                                         col + raw.find(item) - raw.find(line))
                if t not in states:
                    raise MdpError(f"line {lineno}: unknown state {t}")
                try:
                    row[t] = row.get(t, Fraction(0)) + parse_rational(p)
                except ValueError as e:
                    raise MdpSyntaxError(str(e), lineno, col) from None
            if not row:
                raise MdpSyntaxError("empty transition row", lineno, col)
            total = sum(row.values())
            if total != 1:
                raise MdpError(f"line {lineno}: row sum {total} ≠ 1")
            rows[(s, a)] = row
            order.append((s, a))
        else:
            raise MdpSyntaxError(f"unrecognised line {line!r}", lineno, col)
    if states is None or actions is None:
        raise MdpSyntaxError("missing 'states:' or 'actions:' declaration", 1)
    available: dict[str, list[str]] = {s: [] for s in states}
    for s, a in order:
        available[s].append(a)
    for s in states:
        if not available[s]:
            raise MdpError(f"state {s} has no available actions")
    # action order at a state follows the declared action order
    av = {s: tuple(a for a in actions if a in available[s]) for s in states}
    kernel = {
        (s, a): tuple(r.get(t, Fraction(0)) for t in states) for (s, a), r in rows.items()
    }
    return Mdp(tuple(states), tuple(actions), av, kernel)


def check_distribution(mu: Sequence, n: int) -> Distribution:
    mu = tuple(Fraction(x) for x in mu)
    if len(mu) != n:
        raise ValueError(f"distribution has {len(mu)} entries, expected {n}")
    if any(x < 0 for x in mu) or sum(mu) != 1:
        raise ValueError(f"not a probability distribution: {[str(x) for x in mu]}")
    return mu


@dataclass(frozen=True)
class MemorylessStrategy:
    prob: Mapping[tuple[str, str], Fraction]

    def validate(self, mdp: Mdp) -> None:
        for (s, a), p in self.prob.items():
            if p < 0:
                raise MdpError(f"negative probability for ({s}, {a})")
            if p and (s not in mdp.index or a not in mdp.available[s]):
                raise MdpError(f"probability on unavailable pair ({s}, {a})")
        for s in mdp.states:
            total = sum(self.prob.get((s, a), Fraction(0)) for a in mdp.available[s])
            if total != 1:
                raise MdpError(f"action probabilities at {s} sum to {total}")

    def at(self, s: str, a: str, mu=None) -> Fraction:
        return self.prob.get((s, a), Fraction(0))

    @classmethod
    def uniform(cls, mdp: Mdp) -> "MemorylessStrategy":
        return cls({(s, a): Fraction(1, len(mdp.available[s])) for s, a in mdp.pairs()})

    @classmethod
    def for_chain(cls, mdp: Mdp) -> "MemorylessStrategy":
        if not mdp.is_chain():
            raise MdpError("MDP is not a Markov chain")
        return cls.uniform(mdp)


@dataclass(frozen=True)
class AffineDistStrategy:
    """pi(s,a)(mu) = N_{s,a}(mu) / sum_b N_{s,b}(mu) with affine numerators."""

    numerators: Mapping[tuple[str, str], tuple[tuple[Fraction, ...], Fraction]]
    eps_den: Fraction = DEFAULT_EPS_DEN

    def numerator(self, s: str, a: str, mu: Sequence[Fraction]) -> Fraction:
        e, f = self.numerators[(s, a)]
        return sum((c * x for c, x in zip(e, mu)), Fraction(0)) + f

    def denominator(self, mdp: Mdp, s: str, mu: Sequence[Fraction]) -> Fraction:
        return sum((self.numerator(s, a, mu) for a in mdp.available[s]), Fraction(0))

    def at(self, s: str, a: str, mu: Sequence[Fraction], mdp: Mdp) -> Fraction:
        den = self.denominator(mdp, s, mu)
        if den == 0:
            raise ZeroDivisionError(f"strategy denominator vanishes at state {s}")
        return self.numerator(s, a, mu) / den

    def validate(self, mdp: Mdp) -> None:
        """Check numerators >= 0 and denominators >= eps_den on the whole simplex."""
        n = mdp.n
        simplex = [([1 if j == i else 0 for j in range(n)], Fraction(0)) for i in range(n)]
        simplex += [([1] * n, Fraction(-1)), ([-1] * n, Fraction(1))]
        for s, a in mdp.pairs():
            if (s, a) not in self.numerators:
                raise MdpError(f"missing numerator for ({s}, {a})")
            e, f = self.numerators[(s, a)]
            if len(e) != n:
                raise MdpError(f"numerator for ({s}, {a}) has wrong dimension")
            res = solve_lp(simplex, n, maximize=[-c for c in e])
            if -res.value + f < 0:
                raise MdpError(f"numerator for ({s}, {a}) is negative somewhere on the simplex")
        for s in mdp.states:
            e_sum = [sum(self.numerators[(s, a)][0][i] for a in mdp.available[s]) for i in range(n)]
            f_sum = sum(self.numerators[(s, a)][1] for a in mdp.available[s])
            res = solve_lp(simplex, n, maximize=[-c for c in e_sum])
            if -res.value + f_sum < self.eps_den:
                raise MdpError(f"denominator at {s} drops below {self.eps_den} on the simplex")
        for (s, a) in self.numerators:
            if s not in mdp.index or a not in mdp.available[s]:
                raise MdpError(f"numerator on unavailable pair ({s}, {a})")


Strategy = Union[MemorylessStrategy, AffineDistStrategy]


def action_prob(mdp: Mdp, strategy: Strategy, s: str, a: str, mu: Sequence[Fraction]) -> Fraction:
    if isinstance(strategy, AffineDistStrategy):
        return strategy.at(s, a, mu, mdp)
    return strategy.at(s, a)


def step(mdp: Mdp, strategy: Strategy, mu: Sequence[Fraction]) -> Distribution:
    """mu'(t) = sum_{s,a} pi(s,a)(mu) * mu(s) * P(s,a)(t)."""
    n = mdp.n
    if len(mu) != n:
        raise ValueError(f"distribution has {len(mu)} entries, expected {n}")
    out = [Fraction(0)] * n
    for i, s in enumerate(mdp.states):
        if not mu[i]:
            continue
        av = mdp.available[s]
        for a in av:
            p = Fraction(1) if len(av) == 1 else action_prob(mdp, strategy, s, a, mu)
            if not p:
                continue
            w = p * mu[i]
            for j, q in enumerate(mdp.kernel[(s, a)]):
                if q:
                    out[j] += w * q
    return tuple(out)


def trajectory(mdp: Mdp, strategy: Strategy, mu0: Sequence[Fraction], n: int) -> list[Distribution]:
    if n < 0:
        raise ValueError("n must be >= 0")
    traj = [tuple(Fraction(x) for x in mu0)]
    for _ in range(n):
        traj.append(step(mdp, strategy, traj[-1]))
    return traj


# strategy files -------------------------------------------------------------

def parse_strategy(text: str, mdp: Mdp) -> Strategy:
    """Read a strategy file.

    Memoryless (default)::

        kind: memoryless
        A b 1
        B a 1

    Affine distributional, one numerator row per available pair
    (coefficients over the state enumeration, then the offset)::

        kind: affine
        A a : 0 1 0 ; 1/10
    """
    kind = "memoryless"
    probs: dict[tuple[str, str], Fraction] = {}
    nums: dict[tuple[str, str], tuple[tuple[Fraction, ...], Fraction]] = {}
    eps = DEFAULT_EPS_DEN
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("kind:"):
            kind = line[5:].strip()
            if kind not in ("memoryless", "affine"):
                raise MdpSyntaxError(f"unknown strategy kind {kind!r}", lineno)
            continue
        if line.startswith("eps_den:"):
            eps = parse_rational(line[8:])
            continue
        if kind == "memoryless":
            parts = line.split()
            if len(parts) != 3:
                raise MdpSyntaxError("expected '<state> <action> <prob>'", lineno)
            s, a, p = parts
            probs[(s, a)] = parse_rational(p)
        else:
            head, sep, rest = line.partition(":")
            coeff_txt, sep2, off_txt = rest.partition(";")
            parts = head.split()
            if not sep or not sep2 or len(parts) != 2:
                raise MdpSyntaxError("expected '<state> <action> : e0 e1 ... ; f'", lineno)
            e = tuple(parse_rational(x) for x in coeff_txt.split())
            nums[(parts[0], parts[1])] = (e, parse_rational(off_txt))
    if kind == "memoryless":
        for (s, a) in probs:
            if s not in mdp.index:
                raise MdpError(f"strategy mentions unknown state {s}")
        # single-action states default to probability 1
        for s in mdp.states:
            av = mdp.available[s]
            if len(av) == 1 and not any((s, b) in probs for b in mdp.actions):
                probs[(s, av[0])] = Fraction(1)
        strat: Strategy = MemorylessStrategy(probs)
    else:
        for s in mdp.states:
            av = mdp.available[s]
            if len(av) == 1 and (s, av[0]) not in nums:
                nums[(s, av[0])] = (tuple([Fraction(0)] * mdp.n), Fraction(1))
        strat = AffineDistStrategy(nums, eps)
    strat.validate(mdp)
    return strat


def format_strategy(strategy: Strategy, mdp: Mdp) -> str:
    if isinstance(strategy, MemorylessStrategy):
        lines = ["kind: memoryless"]
        for s, a in mdp.pairs():
            lines.append(f"{s} {a} {strategy.at(s, a)}")
    else:
        lines = ["kind: affine", f"eps_den: {strategy.eps_den}"]
        for s, a in mdp.pairs():
            e, f = strategy.numerators[(s, a)]
            lines.append(f"{s} {a} : {' '.join(str(x) for x in e)} ; {f}")
    return "\n".join(lines) + "\n"
