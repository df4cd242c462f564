"""Benchmark generators: gridworld robot swarms and PageRank-style chains."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .mdp import Mdp, MdpError

Cell = tuple[int, int]

MOVES = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}
PERPENDICULAR = {
    "up": ("left", "right"),
    "down": ("left", "right"),
    "left": ("up", "down"),
    "right": ("up", "down"),
}
DEFAULT_DAMPING = Fraction(17, 20)

# Bundled 3x3 layout.  Two walls in the middle column make the bottom-left
# target a slippery dead end; an open 3x3 grid with the target at odd
# distance from the start lets half the mass oscillate forever.
GRIDWORLD_3X3 = {
    "n": 3,
    "walls": ((1, 1), (2, 1)),
    "slippery": (((2, 0), Fraction(19, 20)),),
    "targets": ((2, 0),),
}


@dataclass(frozen=True)
class Instance:
    mdp: Mdp
    spec: str
    init: str  # value accepted by parse_init_arg


def cell_name(cell: Cell) -> str:
    return f"r{cell[0]}c{cell[1]}"


def gen_gridworld(
    n: int,
    walls: Iterable[Cell] = (),
    slippery: Mapping[Cell, Fraction] | Iterable[tuple[Cell, Fraction]] = (),
    targets: Sequence[Cell] = (),
    avoid: Optional[Cell] = None,
    threshold: Fraction = Fraction(9, 10),
    avoid_bound: Fraction = Fraction(1, 2),
) -> Instance:
    """Swarm gridworld; states are non-wall cells in row-major order.

    Every robot starts in the top-left cell.  The generated formula asks the
    mass on the first target to exceed ``threshold`` infinitely often and, if ``avoid``
    is given, the mass on that cell to stay at most ``avoid_bound``.
    """
    if n < 2:
        raise ValueError("grid size must be at least 2")
    walls = set(walls)
    if (0, 0) in walls:
        raise ValueError("the top-left cell cannot be a wall")
    slip = dict(slippery.items() if isinstance(slippery, Mapping) else slippery)
    cells = [(r, c) for r in range(n) for c in range(n) if (r, c) not in walls]
    index = {cell: i for i, cell in enumerate(cells)}
    if not targets:
        raise ValueError("at least one target cell is required")
    for cell in list(targets) + ([avoid] if avoid else []) + list(slip):
        if cell not in index:
            raise ValueError(f"cell {cell} is a wall or out of bounds")

    def move(cell: Cell, d: str) -> Optional[Cell]:
        dr, dc = MOVES[d]
        nxt = (cell[0] + dr, cell[1] + dc)
        return nxt if nxt in index else None

    names = tuple(cell_name(c) for c in cells)
    available = {}
    kernel = {}
    for cell in cells:
        s = cell_name(cell)
        acts = tuple(d for d in MOVES if move(cell, d) is not None)
        if not acts:
            raise ValueError(f"cell {cell} is isolated")
        available[s] = acts
        rho = Fraction(slip.get(cell, 0))
        for d in acts:
            row = [Fraction(0)] * len(cells)
            row[index[move(cell, d)]] += 1 - rho
            for side in PERPENDICULAR[d]:
                dest = move(cell, side) or cell
                row[index[dest]] += rho / 2
            kernel[(s, d)] = tuple(row)

    reach = {(0, 0)}
    todo = deque([(0, 0)])
    while todo:
        cell = todo.popleft()
        for d in MOVES:
            nxt = move(cell, d)
            if nxt is not None and nxt not in reach:
                reach.add(nxt)
                todo.append(nxt)
    for t in targets:
        if t not in reach:
            raise ValueError(f"target {t} is disconnected from the start cell")

    mdp = Mdp(names, tuple(MOVES), available, kernel)
    spec = f'G F "V{index[targets[0]]}>={_lit(threshold)}"'
    if avoid is not None:
        spec += f' & G "V{index[avoid]}<={_lit(avoid_bound)}"'
    point = ["1" if i == 0 else "0" for i in range(len(cells))]
    return Instance(mdp, spec, "point:" + ",".join(point))


def _lit(x: Fraction) -> str:
    """Decimal text when exact, so specs keep the familiar "0.9" shape."""
    x = Fraction(x)
    d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d.normalize(), "f") if Fraction(d) == x else str(x)


def parse_digraph(text: str) -> tuple[list[str], list[tuple[str, str]]]:
    """Edge list: ``u v`` or ``u -> v`` per line; ``#`` starts a comment."""
    nodes: list[str] = []
    seen = set()
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].replace("->", " ").strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            u, v = parts[0], None
        elif len(parts) == 2:
            u, v = parts
        else:
            raise ValueError(f"line {lineno}: expected 'u v' or 'u -> v'")
        for x in (u, v):
            if x is not None and x not in seen:
                seen.add(x)
                nodes.append(x)
        if v is not None:
            edges.append((u, v))
    if not nodes:
        raise ValueError("empty graph")
    return nodes, edges


def gen_pagerank(text: str, damping: Fraction = DEFAULT_DAMPING) -> Mdp:
    """Random surfer chain: follow a uniform out-link with ``damping``, else teleport."""
    damping = Fraction(damping)
    if not 0 <= damping <= 1:
        raise MdpError("damping must lie in [0, 1]")
    nodes, edges = parse_digraph(text)
    k = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    out: dict[str, list[str]] = {v: [] for v in nodes}
    for u, v in edges:
        if v not in out[u]:
            out[u].append(v)
    kernel = {}
    for u in nodes:
        row = [(1 - damping) / k] * k
        targets = out[u] or nodes  # dangling nodes link everywhere
        for v in targets:
            row[idx[v]] += damping / len(targets)
        kernel[(u, "go")] = tuple(row)
    return Mdp(tuple(nodes), ("go",), {v: ("go",) for v in nodes}, kernel)
