"""Sets of initial distributions: affine regions or finite point lists."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .atoms import parse_relation
from .lp import is_feasible
from .mdp import check_distribution, parse_rational
from .poly import Poly, simplex_rows


class InitError(ValueError):
    pass


@dataclass(frozen=True)
class InitRegion:
    """Affine rows (each ``>= 0``, intersected with the simplex) or explicit points.

    When ``points`` is nonempty the region is that finite set and ``rows`` is
    ignored.
    """

    n: int
    rows: tuple[Poly, ...] = ()
    points: tuple[tuple[Fraction, ...], ...] = ()

    @classmethod
    def simplex(cls, n: int) -> "InitRegion":
        return cls(n)

    @classmethod
    def point(cls, mu: Sequence) -> "InitRegion":
        mu = tuple(Fraction(x) for x in mu)
        return cls(len(mu), (), (check_distribution(mu, len(mu)),))

    def premises(self) -> list[list[Poly]]:
        """One premise (simplex plus region rows) per universally quantified piece."""
        base = simplex_rows(self.n)
        if self.points:
            return [base + point_rows(p) for p in self.points]
        return [base + list(self.rows)]

    def is_nonempty(self) -> bool:
        if self.points:
            return True
        rows = [r.affine_coeffs(self.n) for r in self.premises()[0]]
        return is_feasible(rows, self.n)

    def contains(self, mu: Sequence[Fraction]) -> bool:
        if self.points:
            return tuple(mu) in self.points
        return all(r.eval_mu(mu) >= 0 for r in simplex_rows(self.n) + list(self.rows))

    def describe(self) -> str:
        if self.points:
            return "points " + "; ".join(",".join(str(x) for x in p) for p in self.points)
        if not self.rows:
            return "simplex"
        return " & ".join(f"{r} >= 0" for r in self.rows)


def point_rows(mu: Sequence[Fraction]) -> list[Poly]:
    """``mu_i = v_i`` as inequality pairs."""
    rows = []
    for i, v in enumerate(mu):
        rows.append(Poly.mu(i) - v)
        rows.append(Poly.const(v) - Poly.mu(i))
    return rows


def parse_point(text: str, n: int) -> tuple[Fraction, ...]:
    vals = [parse_rational(x) for x in text.replace(",", " ").split()]
    try:
        return check_distribution(vals, n)
    except ValueError as e:
        raise InitError(str(e)) from None


def parse_init(text: str, n: int) -> InitRegion:
    """Init-region file: affine relations over ``V0..V{n-1}`` or ``point:`` lines.

    A bare ``simplex`` line (or an empty file) means every distribution.
    """
    rows: list[Poly] = []
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line == "simplex":
            continue
        try:
            if line.startswith("point:"):
                points.append(parse_point(line[6:], n))
            else:
                rows.extend(parse_relation(line, n))
        except ValueError as e:
            raise InitError(f"line {lineno}: {e}") from None
    if points and rows:
        raise InitError("mix of point: entries and affine relations is not supported")
    region = InitRegion(n, tuple(rows), tuple(points))
    if not region.is_nonempty():
        raise InitError("initial region does not intersect the probability simplex")
    return region


def parse_init_arg(arg: str, n: int) -> InitRegion:
    """CLI form: ``point:1/3,1/3,1/3``, ``simplex`` or inline relations separated by ``;``."""
    arg = arg.strip()
    if arg == "simplex":
        return InitRegion.simplex(n)
    if arg.startswith("point:"):
        return InitRegion(n, (), tuple(parse_point(p, n) for p in arg[6:].split(";")))
    return parse_init(arg.replace(";", "\n"), n)
