"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line with the measured numbers; the lines are
printed together in the terminal summary.  Run alone with
``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from dataclasses import replace
from fractions import Fraction as F

import pytest

from distcert.automata import parse_spec
from distcert.bench import GRIDWORLD_3X3, gen_gridworld
from distcert.cli import main
from distcert.farkas import farkas_transform, handelman_transform
from distcert.mdp import trajectory
from distcert.pipeline import Config, run
from distcert.region import parse_init_arg
from distcert.smt import emit_smtlib
from distcert.validate import check_certificate, simulate_monitor

from conftest import ACCEPTANCE, DATA, GF_SPEC, THIRD, UNTIL_SPEC, needs_solver
from planted import planted_affine, planted_quadratic, solve_system, violations

pytestmark = needs_solver

MU0 = (THIRD, THIRD, THIRD)


def record(number, ok, text):
    ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")
    return ok


def _timed(fn):
    t = time.monotonic()
    out = fn()
    return out, time.monotonic() - t


@pytest.fixture(scope="module")
def grid():
    inst = gen_gridworld(**GRIDWORLD_3X3)
    nba = parse_spec(inst.spec, inst.mdp.n)
    init = parse_init_arg(inst.init, inst.mdp.n)
    return inst, nba, init


@pytest.fixture(scope="module")
def solved(running, gf_nba, until_nba, b_at_a, init_point, grid):
    """Regression instances shared by criteria 1-4 and 7."""
    out = {}
    out["gf-verify"] = _timed(lambda: run(running, gf_nba, init_point, b_at_a))
    out["gf-synth"] = _timed(lambda: run(running, gf_nba, init_point, None, Config(strategy_class="memoryless")))
    out["u-verify"] = _timed(lambda: run(running, until_nba, init_point, b_at_a))
    out["u-synth"] = _timed(lambda: run(running, until_nba, init_point))
    inst, nba, init = grid
    out["grid-synth"] = _timed(lambda: run(inst.mdp, nba, init))
    return out


def test_1_running_verification(solved):
    result, secs = solved["gf-verify"]
    tv = result.counts["template_vars"]
    verdict = result.check.verdict if result.check else "none"
    ok = result.status == "solved" and verdict == "validated" and tv == 16 and secs <= 60
    assert record(1, ok, f"verify GF status={result.status} validator={verdict} "
                         f"template vars={tv} (want 16) time={secs:.2f}s (budget 60s)")


def test_2_running_synthesis(running, solved):
    result, secs = solved["gf-synth"]
    verdict = result.check.verdict if result.check else "none"
    traj = trajectory(running, result.solution.strategy, MU0, 200) if result.solution else []
    low = [i for i in range(20, len(traj)) if traj[i][1] < F(249, 1000)]
    tv = result.counts["template_vars"]
    ok = (result.status == "solved" and verdict == "validated" and tv == 20
          and traj and not low and secs <= 120)
    final_b = float(traj[-1][1]) if traj else float("nan")
    assert record(2, ok, f"synth GF status={result.status} validator={verdict} template vars={tv} "
                         f"mu_i(B)<0.249 for i>=20 at {len(low)} steps, mu_200(B)={final_b:.6f} "
                         f"time={secs:.2f}s (budget 120s)")


def test_3_until_spec(solved):
    parts = []
    ok = True
    for key in ("u-verify", "u-synth"):
        result, secs = solved[key]
        verdict = result.check.verdict if result.check else "none"
        ok &= result.status == "solved" and verdict == "validated" and secs <= 300
        parts.append(f"{key} {result.status}/{verdict} {secs:.2f}s")
    assert record(3, ok, "; ".join(parts) + " (budget 300s each)")


def test_4_gridworld(solved):
    result, secs = solved["grid-synth"]
    c = result.counts
    verdict = result.check.verdict if result.check else "none"
    ok = result.status == "solved" and verdict == "validated" and secs <= 600
    assert record(4, ok, f"3x3 gridworld {result.status}/{verdict} time={secs:.2f}s (budget 600s); "
                         f"template vars={c['template_vars']} constraints={c['constraints']} "
                         f"system vars={c['system_vars']} relations={c['system_relations']}")


def test_5_farkas_soundness():
    sat = bad = 0
    for seed in range(200):
        c, names, side = planted_affine(seed)
        out = solve_system(farkas_transform(c), names, side)
        if out.status == "sat":
            sat += 1
            bad += violations(c, out.model, samples=1000, seed=seed)
    ok = sat == 200 and bad == 0
    assert record(5, ok, f"Farkas planted instances sat {sat}/200, violations at 1000 samples each: {bad}")


def test_6_handelman_soundness():
    sat = bad = 0
    mismatched = 0
    for seed in range(100):
        c, names, side = planted_quadratic(seed)
        out = solve_system(handelman_transform(c, 2), names, side)
        if out.status == "sat":
            sat += 1
            bad += violations(c, out.model, samples=1000, seed=seed)
        affine, _, _ = planted_affine(seed)
        if emit_smtlib(handelman_transform(affine, 1)) != emit_smtlib(farkas_transform(affine)):
            mismatched += 1
    ok = sat == 100 and bad == 0 and mismatched == 0
    assert record(6, ok, f"Handelman planted instances sat {sat}/100, violations {bad}, "
                         f"degree-1 emissions differing from Farkas: {mismatched}/100")


def _mutants(sol):
    """Single sign flips of nonzero certificate coefficients."""
    for q, (coeffs, off) in sol.ranking.items():
        for i, x in enumerate(list(coeffs) + [off]):
            if x:
                row = (tuple(-c if j == i else c for j, c in enumerate(coeffs)), -off if i == len(coeffs) else off)
                yield replace(sol, ranking={**sol.ranking, q: row})
    for q, rows in sol.invariant.items():
        for k, (coeffs, off) in enumerate(rows):
            for i, x in enumerate(list(coeffs) + [off]):
                if x:
                    row = (tuple(-c if j == i else c for j, c in enumerate(coeffs)), -off if i == len(coeffs) else off)
                    new = rows[:k] + (row,) + rows[k + 1:]
                    yield replace(sol, invariant={**sol.invariant, q: new})


def test_7_mutation_rejection(running, gf_nba, until_nba, init_point, grid, solved):
    inst, gnba, ginit = grid
    cases = {
        "gf-verify": (running, gf_nba, init_point),
        "gf-synth": (running, gf_nba, init_point),
        "u-verify": (running, until_nba, init_point),
        "u-synth": (running, until_nba, init_point),
        "grid-synth": (inst.mdp, gnba, ginit),
    }
    total = rejected = 0
    for key, (mdp, nba, init) in cases.items():
        sol = solved[key][0].solution
        for m in _mutants(sol):
            total += 1
            rejected += not check_certificate(m, mdp, nba, init).ok
    rate = rejected / total if total else 0.0
    ok = total > 0 and rate >= 0.9
    assert record(7, ok, f"sign-flip mutants rejected {rejected}/{total} ({rate:.1%}, need >= 90%)")


def test_8_negative_control(running, b_at_a, capsys):
    spec = 'G "V1>=0.9"'
    code = main(["synthesize", "--mdp", str(DATA / "running.mdp"), "--spec", spec,
                 "--init", "point:1/3,1/3,1/3"])
    out = capsys.readouterr().out
    report = simulate_monitor(running, b_at_a, MU0, parse_spec(spec, 3), 200)
    ok = code == 1 and "certificate written" not in out and report.verdict == "inconsistent" and report.failed_at == 0
    assert record(8, ok, f"synthesis exit={code} (want 1); monitor {report.verdict} at step {report.failed_at}")


def _bundled():
    running = (DATA / "running.mdp").read_text()
    specs = [s for s in (DATA / "specs.txt").read_text().splitlines() if s and not s.startswith("#")]
    for spec in specs:
        yield "running", running, spec, (DATA / "running.init").read_text()
    yield "grid3x3", (DATA / "grid3x3.mdp").read_text(), (DATA / "grid3x3.spec").read_text().strip(), \
        (DATA / "grid3x3.init").read_text()


def _strip_timing(obj):
    obj = dict(obj)
    obj.pop("timing", None)
    return obj


def test_9_determinism(running, gf_nba, until_nba, b_at_a, init_point, grid):
    from distcert.automata import parse_spec as spec_of
    from distcert.mdp import parse_mdp
    from distcert.region import parse_init

    emitted_same = 0
    count = 0
    for name, mdp_text, spec, init_text in _bundled():
        mdp = parse_mdp(mdp_text)
        nba = spec_of(spec, mdp.n)
        init = parse_init(init_text, mdp.n)
        a = run(mdp, nba, init, None, emit_only=True).emitted
        b = run(mdp, nba, init, None, emit_only=True).emitted
        count += 1
        emitted_same += a == b
    reports_same = 0
    pairs = [(running, gf_nba, init_point, b_at_a), (running, until_nba, init_point, None),
             (grid[0].mdp, grid[1], grid[2], None)]
    for mdp, nba, init, strat in pairs:
        first = _strip_timing(run(mdp, nba, init, strat).to_json())
        second = _strip_timing(run(mdp, nba, init, strat).to_json())
        reports_same += first == second
    ok = emitted_same == count and reports_same == len(pairs)
    assert record(9, ok, f"byte-identical SMT emissions {emitted_same}/{count} bundled instances; "
                         f"identical reports modulo timing {reports_same}/{len(pairs)}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
