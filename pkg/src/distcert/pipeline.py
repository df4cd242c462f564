"""End-to-end driver: templates, constraints, quantifier elimination, solving, validation."""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .automata import Nba
from .certificate import CertificateError, CertificateSolution, extract_solution
from .constraints import (
    DEFAULT_CHOICE_BUDGET,
    ForallConstraint,
    Relation,
    count_choices,
    enumerate_choices,
    gen_all_buchi,
    gen_initial,
    gen_strategy_validity,
)
from .farkas import ExistentialSystem, transform
from .mdp import Mdp, MemorylessStrategy, Strategy
from .pdts import Pdts, build_pdts
from .region import InitRegion
from .smt import DEFAULT_SOLVER, SolverError, emit_smtlib, invoke_solver
from .templates import (
    CertTemplate,
    StrategyTemplate,
    make_cert_template,
    make_strategy_template,
    symbolic_step,
)
from .validate import CheckReport, check_certificate

log = logging.getLogger(__name__)

SIMPLIFY_TIMEOUT = 30.0

ENCODINGS = {
    "auto": ("strengthened", "full"),
    "strengthened": ("strengthened",),
    "full": ("full",),
}


@dataclass
class Config:
    mode: str = "universal"
    strategy_class: str = "memoryless"
    invariant_size: int = 1
    handelman_degree: int = 2
    choice_budget: int = DEFAULT_CHOICE_BUDGET
    timeout: float = 300.0
    solver: str = DEFAULT_SOLVER
    encoding: str = "auto"
    workers: int = 1
    simplify: bool = True


@dataclass
class Attempt:
    index: int
    encoding: str
    init_label: str
    choice: dict
    status: str
    system_vars: int
    system_relations: int
    smt_sha256: str
    wall_time: float
    detail: str = ""

    def to_json(self, nba: Nba) -> dict:
        return {
            "index": self.index,
            "encoding": self.encoding,
            "init": self.init_label,
            "choice": format_choice(self.choice, nba),
            "status": self.status,
            "system_vars": self.system_vars,
            "system_relations": self.system_relations,
            "smt_sha256": self.smt_sha256,
            "detail": self.detail,
        }


@dataclass
class Result:
    task: str
    status: str  # solved | not-solved | emitted
    solution: Optional[CertificateSolution]
    check: Optional[CheckReport]
    attempts: list[Attempt]
    counts: dict
    choices: dict
    timing: dict
    pdts: Pdts
    emitted: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.status in ("solved", "emitted") else 1

    def to_json(self) -> dict:
        nba = self.pdts.nba
        mdp = self.pdts.mdp
        out = {
            "task": self.task,
            "status": self.status,
            "instance": {
                "states": mdp.n,
                "actions": len(mdp.actions),
                "automaton_states": len(nba.states),
                "atoms": [a.text for a in nba.ap],
                "letters": len(self.pdts.letters),
                "pdts_transitions": len(self.pdts.transitions),
                "init": self.pdts.init.describe(),
            },
            "counts": self.counts,
            "choices": self.choices,
            "attempts": [a.to_json(nba) for a in self.attempts],
            "validation": None if self.check is None else self.check.to_json(),
            "timing": self.timing,
        }
        if self.emitted:
            out["emitted"] = self.emitted
        return out

    def text(self) -> str:
        lines = [f"{self.task}: {self.status}"]
        c = self.counts
        lines.append(
            f"template coefficients {c['template_vars']}, constraints {c['constraints']}, "
            f"after elimination {c['system_vars']} variables / {c['system_relations']} relations"
        )
        lines.append(
            f"successor choices: {self.choices['total']} total, budget {self.choices['budget']}, "
            f"tried {self.choices['tried']}"
        )
        for a in self.attempts:
            lines.append(
                f"  attempt {a.index} [{a.encoding}{', ' + a.init_label if a.init_label else ''}] "
                f"{a.status} ({a.wall_time:.2f}s){': ' + a.detail if a.detail else ''}"
            )
        if self.check is not None:
            lines.append(self.check.text().rstrip())
        t = self.timing
        lines.append(
            "time: " + ", ".join(f"{k} {v:.2f}s" for k, v in t.items() if isinstance(v, float))
        )
        return "\n".join(lines) + "\n"


def format_choice(choice, nba: Nba) -> list:
    return [
        {"state": q, "letter": sorted(letter), "target": t}
        for (q, letter), t in sorted(choice.items(), key=lambda kv: (nba.index[kv[0][0]], sorted(kv[0][1])))
    ]


@dataclass
class _Job:
    index: int
    choice_index: int
    encoding: str
    init: InitRegion
    init_label: str
    choice: dict


def _constraints(
    cert: CertTemplate,
    pdts: Pdts,
    init: InitRegion,
    mode: str,
    choice,
    images,
    den,
    strat_t: Optional[StrategyTemplate],
) -> tuple[list[ForallConstraint], list[Relation], list[str]]:
    foralls, rels, witness = gen_initial(mode, init, cert)
    foralls = foralls + gen_all_buchi(cert, pdts.letters, choice, images, den)
    if strat_t is not None:
        f2, r2 = gen_strategy_validity(strat_t)
        foralls += f2
        rels = rels + r2
    return foralls, rels, witness


def build_system(
    cert: CertTemplate,
    pdts: Pdts,
    init: InitRegion,
    mode: str,
    choice,
    images,
    den,
    strat_t: Optional[StrategyTemplate],
    encoding: str,
    handelman_degree: int,
) -> tuple[ExistentialSystem, list[str], int]:
    """The existential system for one successor choice; also witness vars and constraint count."""
    foralls, rels, witness = _constraints(cert, pdts, init, mode, choice, images, den, strat_t)
    sys = ExistentialSystem()
    sys.declare(cert.variables())
    if strat_t is not None:
        sys.declare(strat_t.variables())
    sys.declare(witness)
    for r in rels:
        sys.add(r)
    for c in foralls:
        sys.extend(transform(c, handelman_degree, strengthened=(encoding == "strengthened")))
    sys.check_closed()
    return sys, witness, len(foralls) + len(rels)


def round_strategy(mdp: Mdp, strategy: MemorylessStrategy) -> MemorylessStrategy:
    """The deterministic strategy playing a most likely action (first on ties)."""
    prob = {}
    for s in mdp.states:
        av = mdp.available[s]
        best = max(av, key=lambda a: (strategy.at(s, a), -av.index(a)))
        for a in av:
            prob[(s, a)] = Fraction(int(a == best))
    return MemorylessStrategy(prob)


def _init_candidates(init: InitRegion, mode: str) -> list[tuple[InitRegion, str]]:
    if mode == "existential" and len(init.points) > 1:
        return [(InitRegion.point(p), f"init point {k}") for k, p in enumerate(init.points)]
    return [(init, "")]


def run(
    mdp: Mdp,
    nba: Nba,
    init: InitRegion,
    strategy: Optional[Strategy] = None,
    config: Optional[Config] = None,
    emit_only: bool = False,
) -> Result:
    """Verify ``strategy`` or, when it is None, synthesize one of ``config.strategy_class``."""
    config = config or Config()
    t_start = time.monotonic()
    timing: dict = {}
    task = "verify" if strategy is not None else "synthesize"
    if config.encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {config.encoding!r}")
    if config.mode not in ("universal", "existential"):
        raise ValueError(f"unknown mode {config.mode!r}")

    t0 = time.monotonic()
    pdts = build_pdts(mdp, nba, init, strategy)
    cert = make_cert_template(nba, mdp.n, config.invariant_size)
    strat_t = None
    if strategy is None:
        strat_t = make_strategy_template(mdp, config.strategy_class)
    images, den = symbolic_step(mdp, strategy if strategy is not None else strat_t)
    timing["build"] = time.monotonic() - t0

    template_vars = len(cert.variables()) + (len(strat_t.variables()) if strat_t else 0)
    total = count_choices(nba, pdts.letters)
    choices = list(enumerate_choices(nba, pdts.letters, config.choice_budget))
    jobs = []
    for enc in ENCODINGS[config.encoding]:
        for cand, label in _init_candidates(init, config.mode):
            for ci, ch in enumerate(choices):
                jobs.append(_Job(len(jobs), ci, enc, cand, label, ch))

    counts = {"template_vars": template_vars, "constraints": 0, "system_vars": 0, "system_relations": 0}
    attempts: list[Attempt] = []
    tried: set[int] = set()
    timing["transform"] = 0.0
    timing["solve"] = 0.0
    timing["validate"] = 0.0
    emitted: list[str] = []

    def prepare(job: _Job):
        t = time.monotonic()
        sys, witness, n_cons = build_system(
            cert, pdts, job.init, config.mode, job.choice, images, den, strat_t,
            job.encoding, config.handelman_degree,
        )
        text = emit_smtlib(sys)
        return sys, witness, n_cons, text, time.monotonic() - t

    if emit_only:
        for job in jobs:
            sys, _, n_cons, text, dt = prepare(job)
            timing["transform"] += dt
            emitted.append(text)
            if job.index == 0:
                counts.update(constraints=n_cons, system_vars=len(sys.variables),
                              system_relations=len(sys.relations))
        timing["total"] = time.monotonic() - t_start
        return Result(task, "emitted", None, None, [], counts,
                      {"total": total, "budget": config.choice_budget, "tried": 0},
                      timing, pdts, emitted)

    def solve(job: _Job):
        sys, witness, n_cons, text, dt = prepare(job)
        outcome = invoke_solver(text, config.solver, config.timeout, sys.variables)
        return job, sys, witness, n_cons, text, dt, outcome

    solution = None
    check = None
    workers = max(1, config.workers)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for start in range(0, len(jobs), workers):
            chunk = jobs[start:start + workers]
            if pool is None:
                try:
                    outs = [solve(chunk[0])]
                except SolverError as e:
                    outs = [(chunk[0], None, None, 0, "", 0.0, e)]
            else:
                futures = [pool.submit(solve, j) for j in chunk]
                outs = []
                for j, f in zip(chunk, futures):
                    try:
                        outs.append(f.result())
                    except SolverError as e:
                        outs.append((j, None, None, 0, "", 0.0, e))
            for job, sys, witness, n_cons, text, dt, outcome in outs:
                timing["transform"] += dt
                tried.add(job.choice_index)
                if isinstance(outcome, SolverError):
                    attempts.append(Attempt(job.index, job.encoding, job.init_label, job.choice,
                                            "solver-error", 0, 0, "", 0.0, str(outcome)))
                    continue
                timing["solve"] += outcome.wall_time
                att = Attempt(
                    job.index, job.encoding, job.init_label, job.choice, outcome.status,
                    len(sys.variables), len(sys.relations),
                    hashlib.sha256(text.encode()).hexdigest(), outcome.wall_time,
                )
                attempts.append(att)
                if not counts["constraints"] or outcome.status == "sat":
                    counts.update(constraints=n_cons, system_vars=len(sys.variables),
                                  system_relations=len(sys.relations))
                if outcome.status == "solver-error":
                    att.detail = outcome.raw.strip().splitlines()[0] if outcome.raw.strip() else ""
                if outcome.status != "sat":
                    continue
                try:
                    sol = extract_solution(
                        outcome.model, cert, mdp, strategy if strategy is not None else strat_t,
                        job.choice, config.mode, witness,
                    )
                except CertificateError as e:
                    att.detail = str(e)
                    continue
                t = time.monotonic()
                report = check_certificate(sol, mdp, nba, job.init if config.mode == "existential" else init,
                                           config.mode, config.solver, config.timeout)
                timing["validate"] += time.monotonic() - t
                if report.ok:
                    solution, check = sol, report
                    break
                att.detail = "validator rejected the model: " + "; ".join(
                    c.name for c in report.failures()
                )
                log.warning("attempt %d: %s", job.index, att.detail)
            if solution is not None:
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)

    simplified = False
    if solution is not None and strat_t is not None and config.simplify and strat_t.kind == "memoryless":
        t = time.monotonic()
        rounded = round_strategy(mdp, solution.strategy)
        if rounded != solution.strategy:
            # a cheap second opinion only: linear encoding, short timeout
            quick = replace(config, workers=1, encoding="strengthened",
                            timeout=min(config.timeout, SIMPLIFY_TIMEOUT))
            sub = run(mdp, nba, init, rounded, quick)
            if sub.status == "solved":
                solution = replace(sub.solution, strategy_given=False)
                check = sub.check
                simplified = True
        timing["simplify"] = time.monotonic() - t

    timing["total"] = time.monotonic() - t_start
    timing["attempts"] = [a.wall_time for a in attempts]
    status = "solved" if solution is not None else "not-solved"
    counts["simplified_strategy"] = simplified
    return Result(
        task, status, solution, check, attempts, counts,
        {"total": total, "budget": config.choice_budget, "tried": len(tried)},
        timing, pdts,
    )
