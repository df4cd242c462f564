from dataclasses import replace
from fractions import Fraction as F

import pytest

from distcert.atoms import letter_of
from distcert.automata import parse_spec
from distcert.certificate import (
    CertificateError,
    CertificateSolution,
    certificate_from_json,
    certificate_to_json,
)
from distcert.mdp import MemorylessStrategy, trajectory
from distcert.pipeline import run
from distcert.validate import check_certificate, simulate_monitor

from conftest import needs_solver
from oracles import stationary

THIRD = F(1, 3)
ZERO_ROW = ((F(0), F(0), F(0)), F(0))


def _example_solution(strategy, q0_offset=F(1)):
    # ranking rows of the hand-worked example; invariants left trivial
    ranking = {
        "q0": ((F(250), F(0), F(750)), q0_offset),
        "q1": ((F(0), F(0), F(-5, 4)), F(5, 4)),
    }
    invariant = {"q0": (ZERO_ROW,), "q1": (ZERO_ROW,)}
    choice = {("q0", frozenset()): "q0", ("q0", frozenset({0})): "q1",
              ("q1", frozenset()): "q0", ("q1", frozenset({0})): "q0"}
    return CertificateSolution(ranking, invariant, strategy, True, choice)


@needs_solver
def test_example_ranking_initial_value(running, gf_nba, b_at_a, init_point):
    sol = _example_solution(b_at_a)
    assert sol.ranking_value("q0", (THIRD, THIRD, THIRD)) == F(1003, 3)
    report = check_certificate(sol, running, gf_nba, init_point)
    (init,) = [c for c in report.conditions if c.name == "init"]
    assert init.status == "pass"
    assert "1003/3" in init.detail


@needs_solver
def test_negative_initial_value_fails(running, gf_nba, b_at_a, init_point):
    sol = _example_solution(b_at_a, q0_offset=F(-1) - F(1000, 3))
    assert sol.ranking_value("q0", (THIRD, THIRD, THIRD)) == -1
    report = check_certificate(sol, running, gf_nba, init_point)
    (init,) = [c for c in report.conditions if c.name == "init"]
    assert init.status == "fail"
    assert init.witness == (THIRD, THIRD, THIRD)
    assert not report.ok


@needs_solver
def test_pipeline_certificates_pass(running, gf_nba, until_nba, b_at_a, init_point):
    for nba in (gf_nba, until_nba):
        for strategy in (b_at_a, None):
            result = run(running, nba, init_point, strategy)
            assert result.status == "solved"
            report = check_certificate(result.solution, running, nba, init_point)
            assert report.verdict == "validated"


@needs_solver
def test_region_init_checked_by_solver(running, gf_nba, b_at_a, init_point):
    from distcert.region import parse_init_arg

    sol = run(running, gf_nba, init_point, b_at_a).solution
    wide = parse_init_arg("V1>=0.3; V0>=0.3; V2>=0.3", 3)
    report = check_certificate(sol, running, gf_nba, wide)
    assert any(c.name == "init" for c in report.conditions)


@needs_solver
def test_dimension_mismatch(running, gf_nba, b_at_a):
    from distcert.region import InitRegion

    with pytest.raises(ValueError):
        check_certificate(_example_solution(b_at_a), running, gf_nba, InitRegion.point([F(1, 2), F(1, 2)]))


def test_certificate_json_round_trip(running, gf_nba, b_at_a):
    sol = _example_solution(b_at_a)
    obj = certificate_to_json(sol, running, gf_nba)
    again = certificate_from_json(obj, running, gf_nba)
    assert again.ranking == sol.ranking
    assert again.invariant == sol.invariant
    assert again.strategy == sol.strategy
    assert again.choice == sol.choice


def test_certificate_json_rejects_bad_strategy(running, gf_nba, b_at_a):
    obj = certificate_to_json(_example_solution(b_at_a), running, gf_nba)
    bad = MemorylessStrategy({**b_at_a.prob, ("A", "a"): F(1, 2)})
    obj2 = certificate_to_json(replace(_example_solution(b_at_a), strategy=bad), running, gf_nba)
    assert obj != obj2
    with pytest.raises((CertificateError, ValueError)):
        certificate_from_json(obj2, running, gf_nba)


def test_monitor_running_example(running, gf_nba, b_at_a):
    report = simulate_monitor(running, b_at_a, (THIRD, THIRD, THIRD), gf_nba, 200)
    assert report.verdict == "consistent"
    limit = stationary([[0, 1, 0], [0, 0, 1], [F(1, 2), 0, F(1, 2)]])
    assert abs(report.trajectory[-1][1] - limit[1]) < F(1, 10**9)
    assert report.limit_letter == frozenset({0})
    assert len(report.accepting_indices) > 50


def test_monitor_stay_in_a(running, gf_nba, a_at_a):
    report = simulate_monitor(running, a_at_a, (THIRD, THIRD, THIRD), gf_nba, 200)
    assert report.verdict == "inconsistent"
    assert report.trajectory[-1][1] < F(249, 1000)


def test_monitor_negative_control(running, b_at_a):
    nba = parse_spec('G "V1>=0.9"', 3)
    report = simulate_monitor(running, b_at_a, (THIRD, THIRD, THIRD), nba, 200)
    assert report.verdict == "inconsistent"
    assert report.failed_at == 0


def test_monitor_tautology(running, a_at_a, b_at_a):
    nba = parse_spec('G "V0>=0"', 3)
    for strat in (a_at_a, b_at_a):
        assert simulate_monitor(running, strat, (THIRD, THIRD, THIRD), nba, 50).verdict == "consistent"


def test_monitor_letters_recomputed(running, until_nba, b_at_a):
    report = simulate_monitor(running, b_at_a, (THIRD, THIRD, THIRD), until_nba, 40)
    traj = trajectory(running, b_at_a, (THIRD, THIRD, THIRD), 40)
    for mu, letter in zip(traj, report.letters):
        expected = frozenset(i for i, a in enumerate(until_nba.ap)
                             if sum(c * x for c, x in zip(a.coeffs, mu)) + a.offset >= 0)
        assert letter == expected == letter_of(until_nba.ap, mu)


def test_monitor_needs_a_step(running, gf_nba, b_at_a):
    with pytest.raises(ValueError):
        simulate_monitor(running, b_at_a, (THIRD, THIRD, THIRD), gf_nba, 0)
