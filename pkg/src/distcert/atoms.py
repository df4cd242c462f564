"""Affine atomic propositions over distributions, letters and guards."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lp import solve_lp
from .poly import Poly, simplex_rows

Letter = frozenset  # frozenset[int] of AP indices

DEFAULT_AP_CAP = 10


class AtomSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class AffineAtom:
    """``coeffs . mu + offset >= 0``."""

    coeffs: tuple[Fraction, ...]
    offset: Fraction
    text: str = ""

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def poly(self) -> Poly:
        return Poly.affine(self.coeffs, self.offset)

    def value(self, mu: Sequence[Fraction]) -> Fraction:
        if len(mu) != len(self.coeffs):
            raise ValueError(f"atom over {len(self.coeffs)} states applied to {len(mu)}-vector")
        return sum((c * x for c, x in zip(self.coeffs, mu)), Fraction(0)) + self.offset

    def key(self) -> tuple:
        return (self.coeffs, self.offset)

    def __str__(self) -> str:
        if self.text:
            return self.text
        return f"{self.poly()} >= 0"


_TOKEN = re.compile(r"\s*(?:(>=|<=|=>|=<|==|=|>|<)|(V\d+)|(\d+(?:\.\d*)?(?:/\d+)?|\.\d+)|([+\-*]))")


def _parse_linear(tokens: list[tuple[str, str]], n: int, text: str) -> tuple[list[Fraction], Fraction]:
    coeffs = [Fraction(0)] * n
    const = Fraction(0)
    if not tokens:
        raise AtomSyntaxError(f"empty side of comparison in {text!r}")
    i = 0
    sign = 1
    while i < len(tokens):
        kind, val = tokens[i]
        if kind == "op" and val in "+-":
            sign = sign * (-1 if val == "-" else 1)
            i += 1
            continue
        c = Fraction(1)
        var = None
        if kind == "num":
            c = Fraction(val)
            i += 1
            if i < len(tokens) and tokens[i] == ("op", "*"):
                i += 1
                if i >= len(tokens) or tokens[i][0] != "var":
                    raise AtomSyntaxError(f"expected variable after '*' in {text!r}")
                var = tokens[i][1]
                i += 1
        elif kind == "var":
            var = val
            i += 1
            if i < len(tokens) and tokens[i] == ("op", "*"):
                i += 1
                if i >= len(tokens) or tokens[i][0] != "num":
                    raise AtomSyntaxError(f"expected number after '*' in {text!r}")
                c = Fraction(tokens[i][1])
                i += 1
        else:
            raise AtomSyntaxError(f"unexpected {val!r} in {text!r}")
        c *= sign
        sign = 1
        if var is None:
            const += c
        else:
            idx = int(var[1:])
            if idx >= n:
                raise AtomSyntaxError(f"{var} out of range for a {n}-state MDP in {text!r}")
            coeffs[idx] += c
        # the next token must be + or -
        if i < len(tokens) and not (tokens[i][0] == "op" and tokens[i][1] in "+-"):
            raise AtomSyntaxError(f"unexpected {tokens[i][1]!r} in {text!r}")
    return coeffs, const


def _tokenize(text: str) -> list[tuple[str, str]]:
    src = text.strip()
    pos = 0
    toks: list[tuple[str, str]] = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            if src[pos:].strip() == "":
                break
            raise AtomSyntaxError(f"cannot parse {text!r} at offset {pos}")
        rel, var, num, op = m.groups()
        if rel:
            toks.append(("rel", rel))
        elif var:
            toks.append(("var", var))
        elif num:
            toks.append(("num", num))
        else:
            toks.append(("op", op))
        pos = m.end()
    return toks


def parse_relation(text: str, n: int) -> list[Poly]:
    """Parse ``lhs REL rhs`` into rows ``>= 0``; an equality yields two rows."""
    toks = _tokenize(text)
    rels = [i for i, t in enumerate(toks) if t[0] == "rel"]
    if len(rels) != 1:
        raise AtomSyntaxError(f"{text!r} must contain exactly one comparison")
    r = rels[0]
    lc, lk = _parse_linear(toks[:r], n, text)
    rc, rk = _parse_linear(toks[r + 1:], n, text)
    diff = Poly.affine([a - b for a, b in zip(lc, rc)], lk - rk)
    rel = toks[r][1]
    if rel in ("=", "=="):
        return [diff, -diff]
    if rel in (">=", "=>", ">"):
        return [diff]
    return [-diff]


def parse_atom(text: str, n: int) -> AffineAtom:
    """Parse e.g. ``V1>=0.249``, ``0.2<=V0`` or ``2*V0 + V1 - 1/2 >= 0``.

    Strict comparisons are closed (``>`` read as ``>=``).  Equalities are
    rejected: an equality is a conjunction of two atoms.
    """
    src = text.strip()
    toks = _tokenize(src)
    rels = [i for i, t in enumerate(toks) if t[0] == "rel"]
    if len(rels) != 1:
        raise AtomSyntaxError(
            f"atom {text!r} must contain exactly one comparison (chains and conjunctions "
            "need separate atoms)"
        )
    r = rels[0]
    rel = toks[r][1]
    if rel in ("=", "=="):
        raise AtomSyntaxError(f"equality atom {text!r}: write it as two atoms (>= and <=)")
    lc, lk = _parse_linear(toks[:r], n, text)
    rc, rk = _parse_linear(toks[r + 1:], n, text)
    if rel in (">=", "=>", ">"):
        coeffs = [a - b for a, b in zip(lc, rc)]
        off = lk - rk
    else:
        coeffs = [b - a for a, b in zip(lc, rc)]
        off = rk - lk
    return AffineAtom(tuple(coeffs), off, src)


_REL_SPLIT = re.compile(r"(<=|>=|=<|=>|==|=|<|>)")


def parse_proposition(text: str, n: int) -> list[AffineAtom]:
    """Atoms whose conjunction is ``text``.

    Handles single comparisons, equalities (two atoms) and chains such as
    ``0.2<=V3<0.13`` (one atom per adjacent pair).
    """
    pieces = _REL_SPLIT.split(text.strip())
    operands = [x.strip() for x in pieces[0::2]]
    rels = pieces[1::2]
    if not rels:
        raise AtomSyntaxError(f"proposition {text!r} has no comparison")
    atoms = []
    for lhs, rel, rhs in zip(operands, rels, operands[1:]):
        if rel in ("=", "=="):
            atoms.append(parse_atom(f"{lhs}>={rhs}", n))
            atoms.append(parse_atom(f"{lhs}<={rhs}", n))
        else:
            atoms.append(parse_atom(f"{lhs}{rel}{rhs}", n))
    return atoms


def eval_atom(atom: AffineAtom, mu: Sequence[Fraction]) -> bool:
    return atom.value(mu) >= 0


def letter_of(ap: Sequence[AffineAtom], mu: Sequence[Fraction]) -> Letter:
    return frozenset(i for i, a in enumerate(ap) if eval_atom(a, mu))


def guard_of(letter: Letter, ap: Sequence[AffineAtom]) -> list[Poly]:
    """Closed guard: atoms in the letter as ``expr >= 0``, the rest as ``-expr >= 0``."""
    rows = []
    for i, a in enumerate(ap):
        rows.append(a.poly() if i in letter else -a.poly())
    return rows


def letter_from_mask(mask: int, k: int) -> Letter:
    return frozenset(i for i in range(k) if mask >> i & 1)


def all_letters(k: int) -> list[Letter]:
    return [letter_from_mask(m, k) for m in range(1 << k)]


def letter_sort_key(letter: Letter) -> int:
    return sum(1 << i for i in letter)


def satisfiable_letters(ap: Sequence[AffineAtom], n: int, cap: int = DEFAULT_AP_CAP) -> list[Letter]:
    """Letters that some distribution actually produces.

    Atoms outside the letter must be strictly violated, so each check
    maximises a slack ``t`` under ``-expr - t >= 0`` and asks for ``t > 0``.
    """
    if len(ap) > cap:
        raise ValueError(f"{len(ap)} atomic propositions exceed the cap of {cap}")
    for a in ap:
        if a.dim != n:
            raise ValueError(f"atom {a} has dimension {a.dim}, expected {n}")
    # variables: mu_0 .. mu_{n-1}, then the slack t in [0, 1]
    base = [(list(c) + [Fraction(0)], o) for c, o in (r.affine_coeffs(n) for r in simplex_rows(n))]
    base.append(([Fraction(0)] * n + [Fraction(-1)], Fraction(1)))
    objective = [Fraction(0)] * n + [Fraction(1)]
    out = []
    for letter in all_letters(len(ap)):
        rows = list(base)
        for i, a in enumerate(ap):
            if i in letter:
                rows.append((list(a.coeffs) + [Fraction(0)], a.offset))
            else:
                rows.append(([-c for c in a.coeffs] + [Fraction(-1)], -a.offset))
        res = solve_lp(rows, n + 1, objective)
        if res.status == "optimal" and (res.value > 0 or len(letter) == len(ap)):
            out.append(letter)
    return out


def format_letter(letter: Letter, ap: Sequence[AffineAtom] | None = None) -> str:
    if ap is None:
        return "{" + ",".join(str(i) for i in sorted(letter)) + "}"
    return "{" + ", ".join(f'"{ap[i]}"' for i in sorted(letter)) + "}"
