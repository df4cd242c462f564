"""Exact rational linear programming (two-phase simplex with Bland's rule).

Problems here are tiny (a handful of distribution coordinates and guard rows),
so a dense Fraction tableau is plenty and keeps every answer exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Row = tuple[Sequence[Fraction], Fraction]  # coeffs . x + offset >= 0


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None


def _pivot(T: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    pr = T[r]
    for i, row in enumerate(T):
        if i != r and row[c]:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, pr)]
    if obj[c]:
        f = obj[c]
        obj[:] = [a - f * b for a, b in zip(obj, pr)]


def _run(T, obj, basis, allowed) -> str:
    """Minimise the objective row in place; returns "optimal" or "unbounded"."""
    while True:
        enter = next((j for j in allowed if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                key = (row[-1] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        r = best[1]
        _pivot(T, obj, r, enter)
        basis[r] = enter


def solve_lp(
    rows: Sequence[Row],
    nvars: int,
    maximize: Optional[Sequence[Fraction]] = None,
) -> LpResult:
    """Decide feasibility of ``{x | coeffs.x + offset >= 0 for all rows}``.

    Variables are free.  With ``maximize`` given, also optimise that linear
    objective and return an optimal vertex.
    """
    m = len(rows)
    n_struct = 2 * nvars  # x = xp - xn
    n_slack = m
    n_art = m
    width = n_struct + n_slack + n_art
    T: list[list[Fraction]] = []
    for i, (coeffs, offset) in enumerate(rows):
        coeffs = [Fraction(c) for c in coeffs]
        row = [Fraction(0)] * (width + 1)
        for j, a in enumerate(coeffs):
            row[j] = a
            row[nvars + j] = -a
        row[n_struct + i] = Fraction(-1)
        rhs = -Fraction(offset)
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        row[n_struct + n_slack + i] = Fraction(1)
        row[-1] = rhs
        T.append(row)
    basis = [n_struct + n_slack + i for i in range(m)]

    # phase 1: minimise the sum of artificials
    obj = [Fraction(0)] * (width + 1)
    for i in range(m):
        obj[n_struct + n_slack + i] = Fraction(1)
    for row in T:
        obj = [a - b for a, b in zip(obj, row)]
    _run(T, obj, basis, range(width))
    if -obj[-1] > 0:
        return LpResult("infeasible")

    # drive remaining artificials out of the basis
    first_art = n_struct + n_slack
    for i in range(len(T) - 1, -1, -1):
        if basis[i] >= first_art:
            col = next((j for j in range(first_art) if T[i][j] != 0), None)
            if col is None:
                del T[i]
                del basis[i]
            else:
                _pivot(T, [Fraction(0)] * (width + 1), i, col)
                basis[i] = col

    allowed = range(first_art)
    obj = [Fraction(0)] * (width + 1)
    if maximize is not None:
        for j, c in enumerate(maximize):
            obj[j] = -Fraction(c)
            obj[nvars + j] = Fraction(c)
        for i, b in enumerate(basis):
            if obj[b]:
                f = obj[b]
                obj = [a - f * v for a, v in zip(obj, T[i])]
        status = _run(T, obj, basis, allowed)
        if status == "unbounded":
            return LpResult("unbounded")

    z = [Fraction(0)] * width
    for i, b in enumerate(basis):
        z[b] = T[i][-1]
    x = tuple(z[j] - z[nvars + j] for j in range(nvars))
    value = None
    if maximize is not None:
        value = sum((Fraction(c) * v for c, v in zip(maximize, x)), Fraction(0))
    return LpResult("optimal", x, value)


def feasible_point(rows: Sequence[Row], nvars: int) -> Optional[tuple[Fraction, ...]]:
    res = solve_lp(rows, nvars)
    return res.point if res.status == "optimal" else None


def is_feasible(rows: Sequence[Row], nvars: int) -> bool:
    return solve_lp(rows, nvars).status == "optimal"
