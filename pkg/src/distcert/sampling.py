"""Exact rational sample points on the simplex and on affine polytopes."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterator, Sequence

from .lp import solve_lp

AffineRows = Sequence[tuple[Sequence[Fraction], Fraction]]


def simplex_grid(n: int, den: int) -> Iterator[tuple[Fraction, ...]]:
    """All distributions whose entries are multiples of 1/den."""

    def parts(total: int, k: int):
        if k == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in parts(total - first, k - 1):
                yield (first,) + rest

    for p in parts(den, n):
        yield tuple(Fraction(x, den) for x in p)


def random_simplex_point(n: int, rng: random.Random, scale: int = 10**6) -> tuple[Fraction, ...]:
    weights = [rng.randint(0, scale) for _ in range(n)]
    if not any(weights):
        weights[rng.randrange(n)] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def random_simplex_points(n: int, count: int, seed: int = 0) -> list[tuple[Fraction, ...]]:
    rng = random.Random(seed)
    return [random_simplex_point(n, rng) for _ in range(count)]


def polytope_vertices(
    rows: AffineRows, n: int, rng: random.Random, tries: int = 40
) -> list[tuple[Fraction, ...]]:
    """Vertices of ``{x | rows >= 0}`` hit by random linear objectives.

    Returns an empty list for an infeasible system.  Unbounded directions
    are skipped, so the polytope should be bounded (true for anything
    intersected with the simplex).
    """
    found: dict[tuple[Fraction, ...], None] = {}
    objectives = [[Fraction(0)] * n]
    for i in range(n):
        for sign in (1, -1):
            objectives.append([Fraction(sign if j == i else 0) for j in range(n)])
    while len(objectives) < tries:
        objectives.append([Fraction(rng.randint(-100, 100)) for _ in range(n)])
    for obj in objectives:
        res = solve_lp(rows, n, maximize=obj)
        if res.status == "infeasible":
            return []
        if res.status == "optimal":
            found.setdefault(tuple(res.point), None)
    return list(found)


def polytope_points(
    rows: AffineRows, n: int, count: int, seed: int = 0
) -> list[tuple[Fraction, ...]]:
    """Vertices, midpoints of vertex pairs, then random convex combinations."""
    rng = random.Random(seed)
    verts = polytope_vertices(rows, n, rng)
    if not verts:
        return []
    out = list(verts[:count])
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            if len(out) < count:
                out.append(tuple((a + b) / 2 for a, b in zip(verts[i], verts[j])))
    while len(out) < count:
        k = rng.randint(1, min(len(verts), n + 1))
        chosen = rng.sample(verts, k)
        w = [rng.randint(1, 1000) for _ in chosen]
        total = sum(w)
        out.append(
            tuple(
                sum((Fraction(wi, total) * v[j] for wi, v in zip(w, chosen)), Fraction(0))
                for j in range(n)
            )
        )
    return out
