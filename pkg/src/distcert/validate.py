"""Independent certificate checking and a trajectory monitor.

The checker never looks at Farkas/Handelman multipliers.  Each implication
``premise => row >= 0`` is checked by asking the solver whether
``premise and row < 0`` is satisfiable; unsat means the row holds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .atoms import Letter, format_letter, guard_of, letter_of, satisfiable_letters
from .automata import Nba, has_accepting_lasso
from .certificate import CertificateSolution
from .constraints import letter_tag
from .mdp import Mdp, Strategy, trajectory
from .poly import Poly, poly_sum, simplex_rows
from .region import InitRegion
from .sampling import polytope_points, random_simplex_points, simplex_grid
from .smt import DEFAULT_SOLVER, Query, run_queries
from .templates import symbolic_step

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = Fraction(1, 10**9)
SAMPLE_GRID_DEN = 20
SAMPLE_RANDOM = 10000


@dataclass
class ConditionResult:
    name: str
    status: str  # pass | fail | sampled
    detail: str = ""
    witness: Optional[tuple[Fraction, ...]] = None

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = [str(x) for x in self.witness]
        return out


@dataclass
class CheckReport:
    conditions: list[ConditionResult] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if any(c.status == "fail" for c in self.conditions):
            return "rejected"
        if any(c.status == "sampled" for c in self.conditions):
            return "validated (sampled)"
        return "validated"

    @property
    def ok(self) -> bool:
        return self.verdict != "rejected"

    def failures(self) -> list[ConditionResult]:
        return [c for c in self.conditions if c.status == "fail"]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "guards": "closed",
            "conditions": [c.to_json() for c in self.conditions],
        }

    def text(self) -> str:
        lines = [f"certificate: {self.verdict}"]
        for c in self.conditions:
            line = f"  {c.status:7} {c.name}"
            if c.detail:
                line += f"  ({c.detail})"
            if c.witness is not None:
                line += "  at mu=(" + ", ".join(str(x) for x in c.witness) + ")"
            lines.append(line)
        return "\n".join(lines) + "\n"


def _concrete_at(row, images: Sequence[Poly], den: Poly) -> Poly:
    coeffs, offset = row
    return poly_sum([img.scale(c) for c, img in zip(coeffs, images) if c] + [den.scale(offset)])


@dataclass
class _Implication:
    name: str
    premise: list[Poly]
    rows: list[Poly]


def _check_dims(sol: CertificateSolution, mdp: Mdp, nba: Nba) -> None:
    for q in nba.states:
        if q not in sol.ranking or q not in sol.invariant:
            raise ValueError(f"certificate has no rows for automaton state {q}")
        rows = [sol.ranking[q]] + list(sol.invariant[q])
        for coeffs, _ in rows:
            if len(coeffs) != mdp.n:
                raise ValueError(
                    f"certificate row for {q} has dimension {len(coeffs)}, MDP has {mdp.n}"
                )


def _sampled_check(imp: _Implication, row: Poly, n: int, seed: int) -> Optional[tuple]:
    """A premise point violating ``row >= 0``, or None if every sample passes."""
    affine = [p for p in imp.premise if p.mu_degree() <= 1]
    points = list(simplex_grid(n, SAMPLE_GRID_DEN))
    points += random_simplex_points(n, SAMPLE_RANDOM, seed)
    points += polytope_points([p.affine_coeffs(n) for p in affine], n, 500, seed)
    for mu in points:
        if all(p.eval_mu(mu) >= 0 for p in imp.premise) and row.eval_mu(mu) < 0:
            return tuple(mu)
    return None


def _run_implications(
    imps: Sequence[_Implication], n: int, solver: str, timeout: float
) -> list[list[tuple[str, Optional[tuple]]]]:
    """Per implication, per row: (status, witness) with status pass | fail | sampled."""
    queries: list[Query] = []
    where = []
    for ii, imp in enumerate(imps):
        for ri, row in enumerate(imp.rows):
            queries.append(Query(imp.premise, row, f"{imp.name} row {ri}"))
            where.append((ii, ri))
    linear = [k for k, q in enumerate(queries) if q.negated.mu_degree() <= 1
              and all(p.mu_degree() <= 1 for p in q.rows)]
    linear_set = set(linear)
    nonlinear = [k for k in range(len(queries)) if k not in linear_set]
    results: dict[int, tuple[str, Optional[tuple]]] = {}
    for idx, logic in ((linear, "QF_LRA"), (nonlinear, "QF_NRA")):
        if not idx:
            continue
        batch = run_queries([queries[k] for k in idx], n, solver, timeout, logic)
        for k, res in zip(idx, batch):
            if res.status == "unsat":
                results[k] = ("pass", None)
            elif res.status == "sat":
                results[k] = ("fail", res.witness)
            else:
                ii, ri = where[k]
                bad = _sampled_check(imps[ii], imps[ii].rows[ri], n, seed=k)
                results[k] = ("fail", bad) if bad is not None else ("sampled", None)
    out: list[list] = [[None] * len(imp.rows) for imp in imps]
    for k, (ii, ri) in enumerate(where):
        out[ii][ri] = results[k]
    return out


def _combine(rows: list[tuple[str, Optional[tuple]]]) -> tuple[str, Optional[tuple]]:
    for status, w in rows:
        if status == "fail":
            return "fail", w
    if any(status == "sampled" for status, _ in rows):
        return "sampled", None
    return "pass", None


def check_certificate(
    sol: CertificateSolution,
    mdp: Mdp,
    nba: Nba,
    init: InitRegion,
    mode: Optional[str] = None,
    solver: str = DEFAULT_SOLVER,
    timeout: float = 300.0,
) -> CheckReport:
    """Check the initial and Büchi ranking conditions with every symbol concrete."""
    _check_dims(sol, mdp, nba)
    if init.n != mdp.n:
        raise ValueError(f"initial region over {init.n} states, MDP has {mdp.n}")
    mode = mode or sol.mode
    n = mdp.n
    report = CheckReport()
    q0 = nba.q0
    init_rows = [sol.ranking_poly(q0)] + sol.invariant_polys(q0)

    # initial condition
    imps: list[_Implication] = []
    if mode == "existential":
        candidates = [sol.init_witness] if sol.init_witness is not None else list(init.points)
        passed = None
        for mu in candidates:
            if mu is not None and init.contains(mu) and all(r.eval_mu(mu) >= 0 for r in init_rows):
                passed = mu
                break
        if passed is None:
            report.conditions.append(ConditionResult("init", "fail", "no initial distribution satisfies C and I"))
        else:
            report.conditions.append(ConditionResult("init", "pass", "existential witness", tuple(passed)))
    elif init.points:
        for k, mu in enumerate(init.points):
            vals = [r.eval_mu(mu) for r in init_rows]
            name = "init" if len(init.points) == 1 else f"init_pt{k}"
            if all(v >= 0 for v in vals):
                report.conditions.append(ConditionResult(name, "pass", f"C(q0) = {vals[0]}"))
            else:
                report.conditions.append(
                    ConditionResult(name, "fail", f"values {', '.join(map(str, vals))}", tuple(mu))
                )
    else:
        imps.append(_Implication("init", simplex_rows(n) + list(init.rows), init_rows))

    # Büchi ranking condition
    images, den = symbolic_step(mdp, sol.strategy)
    letters = satisfiable_letters(nba.ap, n)
    groups = []  # (name, recorded target, [(target, imp index)])
    for q in nba.states:
        c_here = sol.ranking_poly(q)
        for letter in letters:
            premise = simplex_rows(n) + guard_of(letter, nba.ap) + [c_here] + sol.invariant_polys(q)
            name = f"buchi_q{nba.index[q]}_{letter_tag(letter)}"
            succ = nba.succ(q, letter)
            if not succ:
                imps.append(_Implication(name + "_none", premise, [Poly.const(-1)]))
                groups.append((name, None, [(None, len(imps) - 1)]))
                continue
            recorded = sol.choice.get((q, letter))
            order = ([recorded] if recorded in succ else []) + [t for t in succ if t != recorded]
            entries = []
            for t in order:
                c_next = _concrete_at(sol.ranking[t], images, den)
                inv_next = [_concrete_at(r, images, den) for r in sol.invariant[t]]
                if nba.is_accepting(q):
                    rows = [c_next] + inv_next
                else:
                    rows = [(c_here - 1) * den - c_next, c_next] + inv_next
                imps.append(_Implication(f"{name}_q{nba.index[t]}", premise, rows))
                entries.append((t, len(imps) - 1))
            groups.append((name, recorded, entries))

    results = _run_implications(imps, n, solver, timeout) if imps else []
    if imps and imps[0].name == "init":
        status, w = _combine(results[0])
        report.conditions.append(ConditionResult("init", status, "region", w))
    for name, recorded, entries in groups:
        first_fail = None
        chosen = None
        for t, k in entries:
            status, w = _combine(results[k])
            if status != "fail":
                chosen = (t, status)
                break
            if first_fail is None:
                first_fail = w
        if chosen is None:
            if entries[0][0] is None:
                detail = "premise is satisfiable but the automaton has no successor"
            else:
                detail = "no successor satisfies the condition"
            report.conditions.append(ConditionResult(name, "fail", detail, first_fail))
            continue
        t, status = chosen
        if t is None:
            detail = "premise infeasible"
        elif t == recorded:
            detail = f"successor {t}"
        else:
            detail = f"successor {t} (recorded {recorded} fails)"
        report.conditions.append(ConditionResult(name, status, detail))
    return report


# ---------------------------------------------------------------------------
# simulation monitor


@dataclass
class MonitorReport:
    letters: list[Letter]
    subsets: list[frozenset]
    accepting_indices: list[int]
    converged_at: Optional[int]
    limit_letter: Optional[Letter]
    verdict: str  # consistent | inconsistent | inconclusive
    failed_at: Optional[int]
    trajectory: list[tuple[Fraction, ...]]

    def to_json(self, nba: Nba) -> dict:
        return {
            "verdict": self.verdict,
            "failed_at": self.failed_at,
            "converged_at": self.converged_at,
            "limit_letter": None if self.limit_letter is None else sorted(self.limit_letter),
            "accepting_indices": self.accepting_indices,
            "letters": [sorted(l) for l in self.letters],
            "final": [str(x) for x in self.trajectory[-1]],
        }

    def text(self, nba: Nba) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.failed_at is not None:
            lines.append(f"automaton run dies reading the letter at step {self.failed_at}")
        if self.converged_at is not None:
            lines.append(
                f"converged at step {self.converged_at}; limit letter "
                f"{format_letter(self.limit_letter, nba.ap)}"
            )
        acc = self.accepting_indices
        lines.append(f"accepting states reachable at {len(acc)} of {len(self.subsets)} indices")
        lines.append("final distribution: (" + ", ".join(str(float(x)) for x in self.trajectory[-1]) + ")")
        return "\n".join(lines) + "\n"


def simulate_monitor(
    mdp: Mdp,
    strategy: Strategy,
    mu0: Sequence[Fraction],
    nba: Nba,
    steps: int = 200,
    convergence_tol: Fraction = DEFAULT_TOLERANCE,
) -> MonitorReport:
    """Run the trajectory and the subset construction of the automaton alongside it."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    traj = trajectory(mdp, strategy, mu0, steps)
    letters = [letter_of(nba.ap, mu) for mu in traj]
    current = frozenset([nba.q0])
    subsets = [current]
    failed_at = None
    for i, letter in enumerate(letters[:-1]):
        current = nba.post(current, letter)
        subsets.append(current)
        if not current:
            failed_at = i
            break
    accepting = [i for i, s in enumerate(subsets) if s & nba.accepting]
    converged_at = None
    for i in range(len(traj) - 1):
        if max(abs(a - b) for a, b in zip(traj[i + 1], traj[i])) < convergence_tol:
            converged_at = i
            break
    limit = letters[-1] if converged_at is not None else None
    # a single producible letter fixes the rest of the word
    only = satisfiable_letters(nba.ap, mdp.n)
    forced = only[0] if len(only) == 1 else None
    if failed_at is not None:
        verdict = "inconsistent"
    elif converged_at is not None or forced is not None:
        tail = limit if converged_at is not None else forced
        live = has_accepting_lasso(nba, subsets[-1], [], [tail])
        verdict = "consistent" if live else "inconsistent"
    else:
        verdict = "inconclusive"
    return MonitorReport(letters, subsets, accepting, converged_at, limit, verdict, failed_at, traj)
